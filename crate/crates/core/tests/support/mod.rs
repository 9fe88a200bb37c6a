pub mod bitsim;
