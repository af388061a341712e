//! Hellinger-distance coherence and correlation measures for finite-dimensional
//! quantum states, with seeded verification campaigns.
//!
//! States are [`DensityMatrix`] values in the computational basis. Coherence
//! measures live in [`coherence`], bipartite correlations from local
//! measurements in [`correlations`], incoherent Kraus channels in
//! [`channels`], and inequality checks plus campaigns in [`verify`].

pub mod channels;
pub mod coherence;
pub mod correlations;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod rng;
pub mod states;
pub mod verify;

pub use channels::{apply_channel, apply_map, IncoherentChannel, Outcome};
pub use coherence::{c_g, c_h, c_h_oracle, c_offdiag, CoherenceMeasure, CoherenceResult};
pub use correlations::{
    d_one_sided, d_symmetric, measured_affinity, t_matrix, CorrelationResult, Method, ProductBasis,
};
pub use error::{Error, Result};
pub use linalg::{affinity, fidelity, hellinger_distance, ComplexMatrix};
pub use states::{DensityMatrix, StateFile};
pub use verify::{run_campaign, Campaign, CampaignSummary, CheckReport, Suite};
