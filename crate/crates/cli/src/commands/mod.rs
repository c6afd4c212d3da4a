pub mod bound;
pub mod cert;
pub mod curve;
pub mod lp;
pub mod scheme;
