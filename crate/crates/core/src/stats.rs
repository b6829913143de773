//! Welch's unequal-variance two-sample t-test.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    /// Positive when the first sample's mean is larger. Infinite when both
    /// samples have zero variance but different means.
    #[serde(with = "nonfinite")]
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom; NaN when undefined.
    #[serde(with = "nonfinite")]
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom:
/// `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Returns `None` when either sample has fewer than two observations.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    let diff = ma - mb;
    if se2 == 0.0 {
        return Some(if diff == 0.0 {
            WelchTest {
                t: 0.0,
                df: f64::NAN,
                p: 1.0,
            }
        } else {
            WelchTest {
                t: f64::INFINITY.copysign(diff),
                df: f64::NAN,
                p: 0.0,
            }
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    Some(WelchTest {
        t,
        df,
        p: t_two_sided_p(t, df),
    })
}

/// Serializes non-finite floats as the strings "inf", "-inf" and "nan".
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_zero_and_one() {
        let a = [1.0, 0.0, 1.0, 0.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn degenerate_separation_is_infinite() {
        let r = welch_t_test(&[1.0; 10], &[0.0; 10]).unwrap();
        assert_eq!(r.t, f64::INFINITY);
        assert_eq!(r.p, 0.0);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"t":"inf","df":"nan","p":0.0}"#);
        let back: WelchTest = serde_json::from_str(&json).unwrap();
        assert_eq!(back.t, f64::INFINITY);
    }

    #[test]
    fn needs_two_observations() {
        assert!(welch_t_test(&[1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn p_value_against_known_quantile() {
        // t = 2.228138851986 is the two-sided 5% critical value at 10 df.
        let p = t_two_sided_p(2.228_138_851_986, 10.0);
        assert!((p - 0.05).abs() < 1e-9, "{p}");
    }
}
