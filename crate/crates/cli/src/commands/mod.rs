pub mod connected;
pub mod discovery;
pub mod sensitivity;
pub mod setup;
pub mod sweep;
pub mod verify;
