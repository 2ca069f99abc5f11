//! Invariant density and conjugacy construction.
