//! Integrability criteria.
