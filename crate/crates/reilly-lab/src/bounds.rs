pub struct BoundReport;
pub struct VerifyOpts;
pub fn verify() {}
