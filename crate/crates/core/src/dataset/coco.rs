//! Object-detection interchange file: `images`, `annotations` and
//! `categories` arrays with `[x, y, w, h]` boxes. Transcripts ride along in
//! a per-annotation `transcript` attribute.

use serde::{Deserialize, Serialize};

use crate::geom::BBox;
use crate::scene::{ClassLabel, LabeledObject, Orientation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoFile {
    pub info: CocoInfo,
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoInfo {
    pub description: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    pub bbox: [f64; 4],
    pub area: f64,
    pub iscrowd: u8,
    pub transcript: String,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
    pub supercategory: String,
}

pub fn categories() -> Vec<CocoCategory> {
    ClassLabel::ALL
        .iter()
        .map(|c| CocoCategory {
            id: c.id(),
            name: c.name().to_string(),
            supercategory: "annotation".to_string(),
        })
        .collect()
}

impl CocoAnnotation {
    pub fn from_object(id: u64, image_id: u64, o: &LabeledObject) -> Self {
        CocoAnnotation {
            id,
            image_id,
            category_id: o.class.id(),
            bbox: [o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h],
            area: o.bbox.area(),
            iscrowd: 0,
            transcript: o.transcript.clone(),
            orientation: o.orientation,
        }
    }

    pub fn to_object(&self) -> Option<LabeledObject> {
        let [x, y, w, h] = self.bbox;
        Some(LabeledObject {
            class: ClassLabel::from_id(self.category_id)?,
            bbox: BBox::new(x, y, w, h).ok()?,
            transcript: self.transcript.clone(),
            orientation: self.orientation,
        })
    }
}
