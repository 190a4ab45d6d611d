use thiserror::Error;

use crate::fingerprint::Fingerprint;

/// Failures surfaced by tree construction and queries.
///
/// `CollisionDetected` and `RebuildRequired` are epoch-fatal: every handle
/// created under the current seed must be discarded and the computation
/// restarted with a fresh seed. The remaining variants are ordinary input
/// errors and leave the collection usable.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DdtError {
    /// Two distinct preimages hashed to the same fingerprint under the
    /// current seed.
    #[error("fingerprint collision on {fingerprint:?}")]
    CollisionDetected { fingerprint: Fingerprint },

    /// A build produced a node above the height cap, so tree shapes can no
    /// longer be trusted to stay logarithmic under this seed.
    #[error("level {level} exceeds height cap {cap}")]
    RebuildRequired { level: u32, cap: u32 },

    /// Two handles from different epochs were mixed in one operation.
    #[error("handles belong to different epochs ({left} vs {right})")]
    EpochMismatch { left: u64, right: u64 },

    #[error("index {index} out of range for string of length {len}")]
    IndexOutOfRange { index: u64, len: u64 },

    /// Split position must be strictly inside the string.
    #[error("cannot split length-{len} string at boundary {index}")]
    SplitAtBoundary { index: u64, len: u64 },
}

impl DdtError {
    /// True when the error invalidates the whole epoch rather than the one
    /// call that produced it.
    pub fn is_epoch_fatal(&self) -> bool {
        matches!(
            self,
            DdtError::CollisionDetected { .. } | DdtError::RebuildRequired { .. }
        )
    }
}
