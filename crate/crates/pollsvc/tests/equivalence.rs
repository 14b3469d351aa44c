mod common;

use common::{equivalence, to_decimal, Mode};
use num_bigint::BigInt;
use num_rational::BigRational;

#[test]
fn decimals_are_exact() {
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    assert_eq!(to_decimal(&r(23, 50)), "0.46");
    assert_eq!(to_decimal(&r(-3, 8)), "-0.375");
    assert_eq!(to_decimal(&r(7, 1)), "7");
    assert_eq!(to_decimal(&r(1, 1 << 20)), format!("0.{}", "0".repeat(6) + "95367431640625"));
}

#[tokio::test]
async fn api_matches_library_in_every_mode() {
    for mode in Mode::ALL {
        let (compared, fell_back) = equivalence(mode, 100, 11).await.unwrap();
        assert!(compared >= 100);
        assert!(fell_back > 0, "{mode:?} never exercised a fallback");
    }
}
