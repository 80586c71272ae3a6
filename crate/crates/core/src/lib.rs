//! Support data on finite spaces, local cohomology of poset sheaves, and the
//! truncation functors of the t-structure attached to a support datum.

pub mod cli_io;
pub mod linalg;
pub mod space;
pub mod support;
pub mod sheaf;
pub mod tstructure;
pub mod verify;
