pub mod digest;
pub mod gadgets;
pub mod grid;
pub mod hanano;
pub mod io;
pub mod jelly;
pub mod ncl;
pub mod partition;
pub mod reduce_ncl;
pub mod solver;
pub mod visibility;
