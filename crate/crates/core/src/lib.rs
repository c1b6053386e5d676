//! Causal effect identification and interventional sampling over discrete
//! acyclic directed mixed graphs.
//!
//! The crate is organised around four layers:
//!
//! * [`admg`] holds the graph and its algebra (ancestors, c-components,
//!   mutilation, d-separation).
//! * [`identify`] turns a query into a symbolic [`Estimand`] and evaluates it
//!   exactly against an observational table.
//! * [`idgen`] compiles the same recursion into a [`SamplingNetwork`] of
//!   conditional samplers trained on data.
//! * [`scm`] provides discrete structural causal models that serve as ground
//!   truth, plus a catalog of reference graphs.

pub mod admg;
pub mod dist;
pub mod error;
pub mod identify;
pub mod idgen;
pub mod models;
mod rows;
pub mod scm;

pub use admg::{vars, Admg, AdmgBuilder, VarSet, Variable};
pub use dist::{Assignment, DistTable};
pub use error::{Error, Result};
pub use identify::{
    evaluate_estimand, id, idc, Dist, Estimand, Hedge, Step, TraceLog, TraceStep, Traced,
};
pub use idgen::{
    ancestral_sample, build_query, conditional_gms, idc_gen, idgen, merge_network, network_law,
    project_targets, query_law, sample_query, update, BuildConfig, Proposal, QuerySpec,
    RecursionState, SamplingNetwork, TrainingData,
};
pub use models::{
    exact_conditional, fit_conditional, sample, uniform_model, ConditionalModel, CptModel, Dataset,
    ModelKind,
};
pub use scm::{catalog, empirical_distribution, tvd, CatalogEntry, CatalogQuery, DiscreteScm};
