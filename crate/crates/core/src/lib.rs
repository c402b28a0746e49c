pub mod contour;
pub mod geometry;
pub mod helmholtz;
pub mod incident;
pub mod io;
pub mod pipeline;
pub mod quadrature;
pub mod specfun;
pub mod synthesis;
pub mod validation;
