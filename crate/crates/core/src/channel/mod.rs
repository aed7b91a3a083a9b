//! Geometric channel simulator: UPA geometry, near-field spherical and
//! far-field planar cluster models, and per-scenario realizations.

mod geometry;
mod models;
mod scenario;
pub mod seed;

pub use geometry::{
    fraunhofer_distance, local_angles, wavelength, ArrayGeometry, Orientation, Vec3, SPEED_OF_LIGHT,
};
pub use models::{
    angles_toward, draw_planar_rays, draw_scatter_rays, generate_link, los_spherical, nlos_spherical,
    nlos_spherical_rays, path_gain, planar_cluster_channel, planar_cluster_rays, planar_los, power_factor,
    select_model, steering_vector, Aperture, ChannelModel, Endpoint, LinkChannel, LinkKind, PlanarRay,
    PropagationPhysics, RayGainMode, ScatterRay,
};
pub use scenario::{
    generate_scenario_channels, generate_scenario_links, LinkClass, LinkClasses, Scenario, Topology,
};
pub use seed::{mix64, trial_rng};
