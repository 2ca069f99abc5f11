//! CSV/JSON artifact helpers.
