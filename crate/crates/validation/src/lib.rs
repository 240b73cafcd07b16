//! Holds the `acceptance` test target, which prints one PASS/FAIL line per criterion.
//!
//! It lives in its own package so that a failing criterion does not keep the other
//! test binaries of the workspace from running.
