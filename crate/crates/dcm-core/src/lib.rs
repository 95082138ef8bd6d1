//! Deep collocation solver for boundary-value PDEs with goal-oriented
//! a posteriori error estimation.
//!
//! A feed-forward network `u_theta` is trained to minimise the mean-squared
//! strong-form residual at collocation points sampled from a 2D domain and its
//! boundary. For one or several goal functionals `J_n` the associated adjoint
//! problem is solved the same way, and the dual-weighted-residual estimator
//! `eta ~ J(u) - J(u_theta)` is assembled pointwise from primal residuals
//! weighted by the adjoint, with effectivity-index reporting against reference
//! values where available.
//!
//! Module map:
//! - [`autodiff`]: spatial 2-jets (value/gradient/Hessian) nested with a
//!   reverse-mode parameter tape, so losses containing second spatial
//!   derivatives have exact parameter gradients.
//! - [`network`]: the multilayer perceptron, Xavier initialisation, input
//!   normalisation, checkpoints.
//! - [`optimize`]: Adam warm-up followed by BFGS / L-BFGS with a strong-Wolfe
//!   line search.
//! - [`geometry`]: NURBS curves and surfaces, the example domains,
//!   collocation sampling, Gauss-Legendre quadrature on mapped domains.
//! - [`problems`]: strong-form residual operators (Poisson / regularized
//!   p-Laplacian / stationary Navier-Stokes), their linearizations,
//!   manufactured solutions, and the collocation loss.
//! - [`goals`]: goal functionals, their derivatives (adjoint right-hand
//!   sides), and sign-corrected multi-goal combination.
//! - [`dwr`]: the train / adjoint / estimate / refine loop and the
//!   effectivity report.
//! - [`runner`]: experiment configs, seeds, and report/CSV emission behind
//!   the CLI.

pub mod autodiff;
pub mod dwr;
pub mod error;
pub mod geometry;
pub mod goals;
pub mod network;
pub mod optimize;
pub mod problems;
pub mod rng;
pub mod runner;

pub use error::DcmError;

/// Workspace-wide result alias.
pub type Result<T> = std::result::Result<T, DcmError>;
