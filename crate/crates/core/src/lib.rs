//! Facial expression recognition with Fisherfaces.
//!
//! The pipeline converts images to grayscale, finds faces with Haar
//! cascades, crops and normalizes them, then trains a PCA+LDA projection
//! and classifies by nearest neighbour in the projected space.

pub mod cascade;
pub mod dataset;
pub mod emotion;
pub mod eval;
pub mod fisherface;
pub mod imgproc;
pub mod synth;

pub use emotion::EmotionLabel;
pub use imgproc::{GrayImage, GrayMethod, Rect, RgbImage};
