//! Channel model: geometry, VR masks, channel synthesis and pilot observations.

pub mod diffraction;
pub mod geometry;
pub mod mask;
mod scenario;
mod synth;

pub use diffraction::{fresnel_nu, knife_edge_gain, knife_edge_loss_db};
pub use geometry::{element_distance, far_field_steering_vector, steering_vector, ArrayGeometry};
pub use mask::{vr_mask, MaskCase, Path, VrMask};
pub use scenario::{sample_scenario, subcarrier_wavenumbers, Scenario};
pub use synth::{observe_pilots, synthesize_channel, ChannelTensor, PathSet, PilotObservation};
