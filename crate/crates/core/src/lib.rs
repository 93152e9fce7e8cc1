//! Low-distortion Euclidean embeddings of the cyclic lamplighter group C₂≀Cₙ,
//! exact word metrics, distortion measurement and lower bounds, together with
//! the Fourier-analytic L_p embedding of invariant metrics on finite Abelian
//! groups.

pub mod abelian_lp;
pub mod analysis;
pub mod embedding;
pub mod error;
pub mod group;
pub mod lower_bounds;
pub mod par;
pub mod representations;
pub mod word_metric;

pub use error::{Error, Result};
pub use group::{Arc, CycleIndex, GroupElement, LampConfig, Lamplighter};
pub use par::Exec;
pub use word_metric::{GeneratorSet, WordMetricTable};
