pub mod analysis;
pub mod curlspec;
pub mod error;
pub mod exec;
pub mod flow;
pub mod maps;
pub mod poly;
pub mod s3geom;
pub mod selftest;
