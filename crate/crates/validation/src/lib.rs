//! Holds the `acceptance` test target. Run it with
//! `cargo test -p rellich-validation --test acceptance`.
