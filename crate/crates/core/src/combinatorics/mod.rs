//! Diagrammatic combinatorics: abstracts, histories, admissible sets,
//! wave-vector bookkeeping, tents, and the exhaustive bad-index audit.

pub mod abstracts;
pub mod audit;
pub mod catalog;
pub mod histories;
pub mod tents;
pub mod wave;

pub use abstracts::{
    admissible_closure, boundary, enumerate_abstracts, validate_abstract, Abstract,
    AdmissibleBoundary, AdmissibleSet,
};
pub use audit::{bad_index_audit, AuditEngine, AuditReport, AuditViolation, AuditViolationKind};
pub use catalog::{remainder_catalog, CatalogEntry, RemainderCatalog};
pub use histories::{
    count_histories, enumerate_histories, enumerate_histories_capped, Collision, History,
    DEFAULT_HISTORY_CAP,
};
pub use tents::{is_tent, tent_decomposition, Tent, TentDecomposition};
pub use wave::{
    varpi_from_table, varpi_sequence, varpi_sequence_oracle, wave_vector_table, WaveVectorTable,
};

/// Default closure length K(m₀) = 3m₀ + 9 guaranteeing an admissible set
/// whose boundary abstracts all have length in [K+1, K+m₀+1].
pub fn default_closure_length(m0: usize) -> usize {
    3 * m0 + 9
}
