//! Coined discrete-time quantum walk simulation and coin–position Bell
//! tests, including extended (signed-ensemble) coin preparations,
//! Schmidt-aligned and coarse-grained CHSH evaluation, admissibility and
//! no-signaling verification, randomized witness searches, and finite-shot
//! quasiprobability emulation.
//!
//! ```
//! use walkbell_core::*;
//!
//! // An extended preparation (norm > 1), evaluated through an 8-step walk
//! // with coarse-grained position binnings.
//! let prep = BlochVector::new(0.0, 0.0, 1.45).unwrap();
//! let a0 = CoinObservable::new([0.0, 0.0, 1.0]).unwrap();
//! let a1 = CoinObservable::new([1.0, 0.0, 0.0]).unwrap();
//! let b0 = sign_binning(8, 1);
//! let b1 = threshold_binning(8, 5).unwrap();
//! let (report, table) = evaluate_witness(&prep, (&a0, &a1), (&b0, &b1), 8, 1e-9).unwrap();
//! assert!(table.normalization_error() < 1e-10);
//! assert!(report.ns_deviation < 1e-11);
//! assert_eq!(report.s, table.chsh());
//! ```

pub mod bell;
pub mod error;
pub mod io;
pub mod prep;
pub mod rng;
pub mod schmidt;
pub mod search;
pub mod walk;

pub use bell::{
    check_admissible, check_no_signaling, correlator, evaluate_witness, joint_table, sign_binning,
    threshold_binning, BellReport, CoinObservable, DiagonalBinning, JointTable, JointTableRecord,
    WalkerObservable, DEFAULT_TOL,
};
pub use error::{Error, Result};
pub use prep::{
    coin_state_from_direction, emulate_shots, negativity_cost, sampling_overhead,
    signed_decomposition, BlochVector, EmulationOutcome, EnsembleMember, EnsembleMemberRecord,
    EvolvedEnsemble, SignedEnsemble,
};
pub use schmidt::{
    embed_subspace_observable, horodecki_max, optimal_chsh_settings, schmidt_decompose,
    ChshSettings, EmbeddedWalkerObservable, SchmidtData, SchmidtRecord,
};
pub use search::{
    benchmark_scan_r, build_benchmark, coarse_search, discover_benchmark_direction,
    finite_time_sweep, sample_unit_sphere, CoarseSearchOutcome, CoarseStats, DiscoveryReport,
    ScanBest, ScanPoint, SchmidtBenchmark, SearchConfig, SeedStat, SweepRecord, SweepResult,
    WalkerObsDescriptor, WitnessRecord, DEFAULT_WITNESS_MARGIN,
};
pub use walk::{position_distribution, LatticeState, PositionDistribution};
