//! Evaluation metrics, split by where they sit in the pipeline: on the
//! saliency map before thresholding ([`pre`]) or on binary detections
//! after it ([`post`]).

pub mod post;
pub mod pre;
