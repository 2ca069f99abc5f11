//! Dynamical partitions and the Denjoy-type inequality report.
