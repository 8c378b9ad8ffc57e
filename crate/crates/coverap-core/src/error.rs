//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the core pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field violates its invariant.
    InvalidConfig(String),
    /// Array or tensor dimensions do not match what the operation expects.
    DimMismatch { expected: String, got: String },
    /// An input that must be non-empty was empty.
    EmptyInput(&'static str),
    /// A numeric input or intermediate was NaN/Inf.
    NonFinite { context: &'static str },
    /// A simulated target lies outside the unambiguous range.
    TargetOutOfRange { range_m: f64, max_m: f64 },
    /// Timestamps that must be strictly increasing are not.
    NonMonotoneTimestamps,
    /// Fewer input samples than the operation needs.
    TooFewSamples { needed: usize, got: usize },
    /// No frame satisfied the motion-onset predicate.
    NoOnset,
    /// Initial radar timestamps differ by more than the allowed delay.
    InitialDelayExceeded { delay_ms: i64, max_ms: i64 },
    /// A required sensor track is missing from a vehicle.
    MissingTrack(&'static str),
    /// A frame index falls outside every motion-script phase.
    FrameOutOfScript { frame: usize },
    /// A motion script violates contiguity or phase invariants.
    InvalidScript(String),
    /// A bounding box has a non-positive dimension.
    DegenerateBox,
    /// Evaluation inputs are index-misaligned.
    LengthMismatch { left: usize, right: usize },
    /// Threshold sets of two reports differ.
    ThresholdMismatch,
    /// Every point row of a frame is masked out.
    AllMasked,
    /// Gradient or loss became non-finite during training.
    Divergence { batch: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::NonFinite { context } => write!(f, "non-finite value in {context}"),
            Error::TargetOutOfRange { range_m, max_m } => {
                write!(f, "target at {range_m} m beyond unambiguous range {max_m} m")
            }
            Error::NonMonotoneTimestamps => write!(f, "timestamps not strictly increasing"),
            Error::TooFewSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            Error::NoOnset => write!(f, "no motion onset found"),
            Error::InitialDelayExceeded { delay_ms, max_ms } => {
                write!(f, "initial radar delay {delay_ms} ms exceeds {max_ms} ms")
            }
            Error::MissingTrack(kind) => write!(f, "vehicle exposes no {kind} track"),
            Error::FrameOutOfScript { frame } => {
                write!(f, "frame {frame} outside every script phase")
            }
            Error::InvalidScript(msg) => write!(f, "invalid motion script: {msg}"),
            Error::DegenerateBox => write!(f, "degenerate (zero-volume) box"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::ThresholdMismatch => write!(f, "reports use different threshold sets"),
            Error::AllMasked => write!(f, "all point rows are masked"),
            Error::Divergence { batch } => write!(f, "non-finite loss at batch {batch}"),
        }
    }
}

impl core::error::Error for Error {}
