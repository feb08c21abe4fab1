//! Fixed-mesh ALE finite elements for parabolic problems with moving and
//! growing immersed interfaces.
//!
//! The unit cube is meshed once by macro tetrahedra. Each time step the
//! interface level set is intersected with the macro edges, the edge nodes
//! slide to the intersection points, and every macro tetrahedron is split into
//! four corner tetrahedra plus one octahedron. The resulting hybrid mesh is
//! used for an implicit Euler step of a vector-valued heat equation written in
//! ALE form, and the linear system is solved either all at once (AMG-PCG,
//! AMG-GMRES) or by exact block elimination of the vertex unknowns followed by
//! an AMG-PCG solve of the Schur complement.
//!
//! ```no_run
//! use macro_ale::driver::{ScenarioConfig, Preset, run_simulation};
//!
//! let mut cfg = ScenarioConfig::preset(Preset::Paper1);
//! cfg.n = 8;
//! let summary = run_simulation(&cfg).unwrap();
//! println!("{} steps", summary.reports.len());
//! ```

pub mod ale;
pub mod assembly;
pub mod cutting;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod io;
pub mod level_set;
pub mod mesh;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
