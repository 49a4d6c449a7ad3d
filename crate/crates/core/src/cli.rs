//! Command-line interface. Placeholder while the library layers are built.

pub fn run() -> i32 {
    0
}
