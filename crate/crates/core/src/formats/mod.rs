//! On-disk formats: the binary `SPNF1` field file and ASCII OBJ meshes.

pub mod field_file;
pub mod obj;

pub use field_file::{read_field, read_field_bytes, write_field, write_field_bytes, HEADER_LEN, MAGIC};
pub use obj::{plane_fit_residual, read_obj_vertices, write_obj};
