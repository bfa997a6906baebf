pub mod cm;
pub mod family;
pub mod heights;
pub mod gfunctions;
pub mod numerics;
pub mod periods;
pub mod picard_fuchs;
pub mod relations;
pub mod series;
