pub mod exactmath;
pub mod goodsets;
pub mod vectypes;
pub mod tiling;
pub mod search;
