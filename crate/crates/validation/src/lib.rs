//! End-to-end acceptance checks; see `tests/acceptance.rs`.
