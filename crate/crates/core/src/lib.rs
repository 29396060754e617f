//! Non-dispersive wavepackets of hydrogen in parallel microwave and static
//! fields: secular theory, semiclassical quantization, Floquet spectra and
//! time-dependent ramps.

pub(crate) mod numeric;
pub mod floquet;
pub mod propagator;
pub mod quantizer;
pub mod special;
pub mod secular;
