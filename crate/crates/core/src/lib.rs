pub mod arithmetic;
pub mod error;
pub mod oracle;
pub mod series;
pub mod hypersphere;
pub mod analysis;
pub mod verify;
