pub mod condition;
pub mod examples;
pub mod ito;
pub mod localtime;
pub mod simulate;
pub mod variation;
pub mod young;
