//! Exact truncated q-series in one and two variables.

mod bi;
mod eta;
mod laurent;

pub use bi::{BiSeries, Coefficient, Var, EXACT};
pub use eta::{eta_expand, EtaQuotient};
pub use laurent::LaurentSeries;

use num_bigint::BigInt;

use crate::arith::divisor_power_sum;
use crate::{Error, Result};

/// `E₄ = 1 + 240 Σ σ₃(n) qⁿ` to precision `P`.
pub fn eisenstein_e4(precision: i64) -> LaurentSeries {
    let len = precision.max(0) as usize;
    let coeffs = (0..len)
        .map(|n| if n == 0 { BigInt::from(1) } else { BigInt::from(240) * divisor_power_sum(n as u64, 3) })
        .collect();
    LaurentSeries::from_bigints(0, coeffs, precision)
}

/// Klein's `j = E₄³/Δ`, exact to precision `P ≥ 1`.
pub fn j_function(precision: i64) -> Result<LaurentSeries> {
    if precision < 1 {
        return Err(Error::Precondition(format!("j_function needs precision >= 1, got {precision}")));
    }
    let e4 = eisenstein_e4(precision + 1);
    let delta = eta_expand(&EtaQuotient::new([(1, 24)])?, precision + 2);
    let j = &(&(&e4 * &e4) * &e4) * &delta.inverse()?;
    debug_assert_eq!(j.precision(), precision);
    Ok(j)
}
