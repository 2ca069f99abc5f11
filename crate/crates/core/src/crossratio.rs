//! Ratios, cross-ratios, and their distortions.
