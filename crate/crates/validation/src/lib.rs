//! Test-only package; the acceptance suite is `tests/acceptance.rs`.
