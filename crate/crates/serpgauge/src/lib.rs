//! Std side of serpgauge: HTML segmentation, engine adapters and the replay
//! cache, file formats, reports and charts, and the evaluation pipeline.

pub mod engines;
pub mod formats;
pub mod html;
pub mod mockgen;
pub mod pipeline;
pub mod report;
