//! Finite-level computations in `GL_2(Z/p^n)` and its group rings.

pub mod algebra;
pub mod group;
pub mod induced;

pub use algebra::{
    ideal_power_nilpotency, nakayama_dimension, random_product_containment, regular_action, FiniteGroup, IdealData,
    NakayamaReport, NilpotencyMode, NilpotencyReport,
};
pub use group::{bruhat_census, bruhat_classify, BruhatCensus, enumerate_group, generate_subgroup, iwahori_factor, BruhatCell, GL2ModElement};
