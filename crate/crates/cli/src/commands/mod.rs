pub mod reduce;
pub mod simulate;
pub mod sweep;
pub mod verify;
