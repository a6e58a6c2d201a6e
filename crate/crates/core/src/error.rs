use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// State ids are 1-based and run 1..=7.
    InvalidState(usize),
    /// Discount must lie in [0, 1).
    InvalidDiscount(f64),
    /// Mini-batch update requested before the buffer holds enough transitions.
    BufferNotReady { needed: usize, available: usize },
    /// Asked for more distinct samples than the buffer holds.
    SampleTooLarge { requested: usize, available: usize },
    UnknownAlgorithm(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidState(s) => write!(f, "state id {s} is outside 1..=7"),
            Error::InvalidDiscount(g) => write!(f, "discount {g} is outside [0, 1)"),
            Error::BufferNotReady { needed, available } => write!(
                f,
                "replay buffer holds {available} transitions, {needed} needed before updating"
            ),
            Error::SampleTooLarge { requested, available } => write!(
                f,
                "cannot draw {requested} distinct transitions from a buffer of {available}"
            ),
            Error::UnknownAlgorithm(name) => write!(
                f,
                "unknown algorithm `{name}` (expected td0, tdc, gtd, gtd2, tdrc, rg or impression_gtd)"
            ),
        }
    }
}

impl core::error::Error for Error {}
