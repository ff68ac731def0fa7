//! Multiplicative subgroups of F_p*, their iterated sumsets, and the primes
//! whose multiples stay heavy in binary.
//!
//! The crate answers questions of the following shape, at desk scale but
//! with census-grade performance:
//!
//! - what is ord_p(2), and how does it split p - 1?
//! - which residues are sums of k elements of the subgroup <r> mod p?
//! - what is the lightest binary multiple of p, with an explicit certificate?
//! - which primes up to X divide no number of the form 2^a + 2^b + 1?
//! - which factors of 2^n - 1 force every multiple above a weight floor?
//! - which odd-order subgroups A have A.A + A.A = A + A short of F_p?
//!
//! Modules build bottom-up: [`modarith`] is the numeric substrate,
//! [`subgroup`] and [`sumset`] the set machinery, and [`weight`],
//! [`census`], [`mersenne`], [`restricted`] the consumers. The commonly
//! used types are re-exported at the crate root.

pub mod census;
pub mod error;
pub mod mersenne;
pub mod modarith;
pub mod restricted;
pub mod subgroup;
pub mod sumset;
pub mod weight;

pub use census::{
    classify_prime, density_report, run_census, CensusOptions, CensusReport, CensusTally,
    ClassificationRecord, ClassifyOptions, MinTermsNeg1, PrimeRecord, T2Exception,
};
pub use error::{Error, Result};
pub use mersenne::{mersenne_witness, verify_weight_floor, MersenneWitness};
pub use modarith::{
    factorize, multiplicative_order, pow_mod, sieve_primes, sieve_range, two_adic_split,
    FactorMultiset, OrderProfile,
};
pub use restricted::{
    find_halforder_primes, find_primroot_3mod4_primes, scan_restricted, verify_example,
    RestrictedExample, RestrictedScan,
};
pub use subgroup::{generate_cyclic, generate_multi, odd_part_subgroup, ResidueSet, SubgroupDescriptor};
pub use sumset::{
    add_sets, covers_all, min_terms, reconstruct_exponents, sumset_growth, GrowthStats,
    SumsetLayers,
};
pub use weight::{min_weight_multiple, normalize_certificate, stolarsky_check, WeightCertificate};
