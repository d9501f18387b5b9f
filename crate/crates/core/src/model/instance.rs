use super::{DMChannel, DetFunction, Pmf};
use crate::error::{Error, Result};

/// A noisy device `F` standing in for the perfect function `f`, fed by the
/// i.i.d. source `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyComputationInstance {
    pub source: Pmf,
    pub f: DetFunction,
    pub channel: DMChannel,
}

impl NoisyComputationInstance {
    pub fn new(source: Pmf, f: DetFunction, channel: DMChannel) -> Result<Self> {
        if source.alphabet() != f.domain() {
            return Err(Error::AlphabetMismatch("source alphabet differs from the domain of f".into()));
        }
        if channel.input() != f.domain() {
            return Err(Error::AlphabetMismatch("channel input differs from the domain of f".into()));
        }
        Ok(NoisyComputationInstance { source, f, channel })
    }

    /// Same function and device, different source.
    pub fn with_source(&self, source: Pmf) -> Result<Self> {
        Self::new(source, self.f.clone(), self.channel.clone())
    }
}
