pub mod diagnose;
pub mod iterate;
pub mod replay;
pub mod verify;
