//! Exhaustive verification spread over a rayon pool, one task per message.
//!
//! Reports are folded in message order, so the verdict and the reported
//! counterexample do not depend on the thread count.

use anyhow::Result;
use fbcode_core::channel::{check_leaf_budget, verify_message, MessageReport, VerifyReport};
use fbcode_core::codec::FeedbackCode;
use rayon::prelude::*;

pub const THREADS_ENV: &str = "FBCODE_THREADS";

/// `threads == None` lets rayon pick.
pub fn verify(code: &FeedbackCode, cap: u64, threads: Option<usize>) -> Result<VerifyReport> {
    check_leaf_budget(code, cap)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build()?;
    let reports: Vec<MessageReport> = pool.install(|| {
        (0..code.messages())
            .into_par_iter()
            .map(|theta| verify_message(code, theta))
            .collect::<fbcode_core::Result<_>>()
    })?;
    Ok(VerifyReport::combine(code, reports)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fbcode_core::channel::exhaustive_verify;
    use fbcode_core::Alphabet;

    #[test]
    fn thread_count_does_not_change_the_report() {
        let code = FeedbackCode::from_table(24, 1, Alphabet::new(3).unwrap()).unwrap();
        let serial = exhaustive_verify(&code, 1 << 20).unwrap();
        for t in [1, 2, 4] {
            assert_eq!(verify(&code, 1 << 20, Some(t)).unwrap(), serial);
        }
        assert!(serial.passed());
        assert_eq!(serial.paths, 360);
    }

    #[test]
    fn cap_is_checked_first() {
        let code = FeedbackCode::from_table(24, 1, Alphabet::new(3).unwrap()).unwrap();
        assert!(verify(&code, 359, Some(1)).is_err());
    }
}
