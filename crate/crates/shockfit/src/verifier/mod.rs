//! placeholder
pub struct Chain;
pub enum ChainKind {}
pub struct Cone;
pub struct VerificationReport;
