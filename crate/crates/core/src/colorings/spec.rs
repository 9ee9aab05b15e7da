use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratcore::{floor_div, is_prime, v_p, w_p, Rational};

/// A permutation stored as its image list. Whether it acts on `0..k` or
/// `1..=k` depends on the coloring family that owns it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<u32>);

impl Permutation {
    pub fn identity(len: usize, base: u32) -> Self {
        Permutation((0..len as u32).map(|i| i + base).collect())
    }

    pub fn is_identity(&self, base: u32) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, &x)| x == i as u32 + base)
    }

    fn check(&self, len: usize, base: u32, what: &str) -> Result<()> {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        if sorted != Permutation::identity(len, base).0 {
            return Err(Error::InvalidColoring(format!(
                "{what}: {:?} is not a permutation of {base}..{}",
                self.0,
                base as usize + len - 1
            )));
        }
        Ok(())
    }

    fn apply(&self, x: u32, base: u32) -> u32 {
        self.0[(x - base) as usize]
    }
}

/// Integer-keyed maps arrive as JSON objects, and an internally tagged enum
/// buffers them with string keys, so the keys are parsed by hand.
mod string_keys {
    use std::collections::BTreeMap;
    use std::str::FromStr;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D, K, V>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        D: Deserializer<'de>,
        K: FromStr + Ord,
        V: Deserialize<'de>,
    {
        BTreeMap::<String, V>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("bad key {k:?}")))
            })
            .collect()
    }
}

/// One coloring of the nonzero rationals from the catalog.
///
/// The residue families (`CapCp`, `CPi`) use the residues `1..p` as their
/// color labels; every other family uses `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ColoringSpec {
    /// `v_p(q) mod n`.
    Cpn { p: u64, n: u32 },
    /// `floor(v_p(q) / v) mod n`, flooring toward negative infinity.
    Cpvn { p: u64, v: i64, n: u32 },
    /// `w_p(q)`.
    CapCp { p: u64 },
    /// `pi_{v_p(q)}(w_p(q))`; levels missing from `window` use the identity.
    CPi {
        p: u64,
        #[serde(deserialize_with = "string_keys::deserialize")]
        window: BTreeMap<i64, Permutation>,
    },
    /// The 3-colorings built from `v_2`: on even valuations the color is
    /// `(v_2 mod 6) / 2`, on odd ones `pi` of the color of `2q`.
    C4pi { pi: Permutation },
    /// `sigma_class(v_p(q) mod n)` where the class of `q` is the pair
    /// `{w_p(q), p - w_p(q)}` keyed by its smaller member. The class of 1
    /// is pinned to the identity; missing classes default to it as well.
    OddPrimeFamily {
        p: u64,
        n: u32,
        #[serde(
            rename = "pairClassPermutations",
            default,
            deserialize_with = "string_keys::deserialize"
        )]
        class_perms: BTreeMap<u64, Permutation>,
    },
    /// A finite lookup table.
    Explicit {
        domain: Vec<Rational>,
        colors: Vec<u32>,
    },
}

impl ColoringSpec {
    pub fn validate(&self) -> Result<()> {
        let prime = |p: u64| {
            if is_prime(p) {
                Ok(())
            } else {
                Err(Error::InvalidPrime(p))
            }
        };
        let colors = |n: u32| {
            if n >= 1 {
                Ok(())
            } else {
                Err(Error::InvalidColoring("need at least one color".into()))
            }
        };
        match self {
            ColoringSpec::Cpn { p, n } => {
                prime(*p)?;
                if *n < 2 {
                    return Err(Error::InvalidColoring("c_{p,n} needs n >= 2".into()));
                }
                Ok(())
            }
            ColoringSpec::Cpvn { p, v, n } => {
                prime(*p)?;
                colors(*n)?;
                if *v == 0 {
                    return Err(Error::InvalidColoring("v must be nonzero".into()));
                }
                Ok(())
            }
            ColoringSpec::CapCp { p } => prime(*p),
            ColoringSpec::CPi { p, window } => {
                prime(*p)?;
                for (level, perm) in window {
                    perm.check(*p as usize - 1, 1, &format!("level {level}"))?;
                }
                if window.get(&0).is_some_and(|perm| !perm.is_identity(1)) {
                    return Err(Error::InvalidColoring(
                        "level 0 must be the identity".into(),
                    ));
                }
                Ok(())
            }
            ColoringSpec::C4pi { pi } => pi.check(3, 0, "pi"),
            ColoringSpec::OddPrimeFamily { p, n, class_perms } => {
                prime(*p)?;
                if *p == 2 {
                    return Err(Error::InvalidColoring("p must be odd".into()));
                }
                colors(*n)?;
                for (&class, perm) in class_perms {
                    if class == 0 || class > (*p - 1) / 2 {
                        return Err(Error::InvalidColoring(format!(
                            "{class} is not a residue class key"
                        )));
                    }
                    perm.check(*n as usize, 0, &format!("class {class}"))?;
                    if class == 1 && !perm.is_identity(0) {
                        return Err(Error::InvalidColoring(
                            "class of 1 must be the identity".into(),
                        ));
                    }
                }
                Ok(())
            }
            ColoringSpec::Explicit { domain, colors } => {
                if domain.len() != colors.len() {
                    return Err(Error::InvalidColoring(
                        "domain and colors differ in length".into(),
                    ));
                }
                if domain.iter().any(Rational::is_zero) {
                    return Err(Error::InvalidColoring("zero in domain".into()));
                }
                Ok(())
            }
        }
    }

    /// Number of colors in the palette.
    pub fn num_colors(&self) -> u32 {
        match self {
            ColoringSpec::Cpn { n, .. } | ColoringSpec::Cpvn { n, .. } => *n,
            ColoringSpec::OddPrimeFamily { n, .. } => *n,
            ColoringSpec::CapCp { p } | ColoringSpec::CPi { p, .. } => (*p - 1) as u32,
            ColoringSpec::C4pi { .. } => 3,
            ColoringSpec::Explicit { colors, .. } => {
                let mut c = colors.clone();
                c.sort_unstable();
                c.dedup();
                c.len() as u32
            }
        }
    }

    /// The color of a nonzero rational.
    pub fn eval(&self, q: &Rational) -> Result<u32> {
        if q.is_zero() {
            return Err(Error::UndefinedColor);
        }
        let color = match self {
            ColoringSpec::Cpn { p, n } => v_p(q, *p)?.rem_euclid(*n as i64) as u32,
            ColoringSpec::Cpvn { p, v, n } => {
                floor_div(v_p(q, *p)?, *v).rem_euclid(*n as i64) as u32
            }
            ColoringSpec::CapCp { p } => w_p(q, *p)? as u32,
            ColoringSpec::CPi { p, window } => {
                let w = w_p(q, *p)? as u32;
                match window.get(&v_p(q, *p)?) {
                    Some(perm) => perm.apply(w, 1),
                    None => w,
                }
            }
            ColoringSpec::C4pi { pi } => {
                let v = v_p(q, 2)?;
                let even_color = |v: i64| (v.rem_euclid(6) / 2) as u32;
                if v % 2 == 0 {
                    even_color(v)
                } else {
                    pi.apply(even_color(v + 1), 0)
                }
            }
            ColoringSpec::OddPrimeFamily { p, n, class_perms } => {
                let w = w_p(q, *p)?;
                let class = w.min(*p - w);
                let level = v_p(q, *p)?.rem_euclid(*n as i64) as u32;
                match class_perms.get(&class) {
                    Some(perm) => perm.apply(level, 0),
                    None => level,
                }
            }
            ColoringSpec::Explicit { domain, colors } => {
                let i = domain.iter().position(|d| d == q).ok_or_else(|| {
                    Error::InvalidArgument(format!("{q} is outside the explicit domain"))
                })?;
                colors[i]
            }
        };
        Ok(color)
    }

    /// Colors of `values`, in order.
    pub fn restrict(&self, values: &[Rational]) -> Result<Vec<u32>> {
        values.iter().map(|v| self.eval(v)).collect()
    }

    /// Short human label such as `c[2,3]`.
    pub fn label(&self) -> String {
        match self {
            ColoringSpec::Cpn { p, n } => format!("cpn:{p}:{n}"),
            ColoringSpec::Cpvn { p, v, n } => format!("cpvn:{p}:{v}:{n}"),
            ColoringSpec::CapCp { p } => format!("capcp:{p}"),
            ColoringSpec::CPi { p, window } => {
                format!("cpi:{p} ({} non-default levels)", window.len())
            }
            ColoringSpec::C4pi { pi } => format!("c4pi:{}", join(&pi.0)),
            ColoringSpec::OddPrimeFamily { p, n, .. } => format!("oddprime:{p}:{n}"),
            ColoringSpec::Explicit { domain, .. } => format!("explicit ({} points)", domain.len()),
        }
    }
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ColoringSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses the compact command-line forms:
/// `cpn:P:N`, `cpvn:P:V:N`, `capcp:P`, `cpi:P[:LEVEL=a,b,..;LEVEL=..]`,
/// `c4pi:a,b,c`, `oddprime:P:N[:CLASS=a,b,..;CLASS=..]`.
pub fn parse_coloring(s: &str) -> Result<ColoringSpec> {
    let bad = |m: &str| Error::InvalidColoring(format!("{s:?}: {m}"));
    let parts: Vec<&str> = s.trim().splitn(4, ':').collect();
    let num = |i: usize| -> Result<i64> {
        parts
            .get(i)
            .ok_or_else(|| bad("missing field"))?
            .trim()
            .parse::<i64>()
            .map_err(|_| bad("expected an integer"))
    };
    let perm = |text: &str| -> Result<Permutation> {
        text.split(',')
            .map(|x| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| bad("bad permutation entry"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Permutation)
    };
    let keyed = |text: Option<&&str>| -> Result<BTreeMap<i64, Permutation>> {
        let mut map = BTreeMap::new();
        if let Some(text) = text {
            for item in text.split(';').filter(|t| !t.trim().is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| bad("expected KEY=perm"))?;
                let k: i64 = k.trim().parse().map_err(|_| bad("bad key"))?;
                map.insert(k, perm(v)?);
            }
        }
        Ok(map)
    };
    let spec = match parts[0].trim().to_ascii_lowercase().as_str() {
        "cpn" => ColoringSpec::Cpn {
            p: num(1)? as u64,
            n: num(2)? as u32,
        },
        "cpvn" => ColoringSpec::Cpvn {
            p: num(1)? as u64,
            v: num(2)?,
            n: num(3)? as u32,
        },
        "capcp" => ColoringSpec::CapCp { p: num(1)? as u64 },
        "cpi" => {
            let rest: Vec<&str> = s.trim().splitn(3, ':').collect();
            ColoringSpec::CPi {
                p: rest
                    .get(1)
                    .ok_or_else(|| bad("missing p"))?
                    .trim()
                    .parse()
                    .map_err(|_| bad("bad p"))?,
                window: keyed(rest.get(2))?,
            }
        }
        "c4pi" => ColoringSpec::C4pi {
            pi: perm(parts.get(1).ok_or_else(|| bad("missing permutation"))?)?,
        },
        "oddprime" => {
            let rest: Vec<&str> = s.trim().splitn(4, ':').collect();
            let class_perms = keyed(rest.get(3))?
                .into_iter()
                .map(|(k, v)| (k as u64, v))
                .collect();
            ColoringSpec::OddPrimeFamily {
                p: num(1)? as u64,
                n: num(2)? as u32,
                class_perms,
            }
        }
        other => return Err(bad(&format!("unknown family {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratcore::rat;

    #[test]
    fn eval_examples() {
        assert_eq!(
            ColoringSpec::Cpn { p: 2, n: 3 }.eval(&rat(8, 1)).unwrap(),
            0
        );
        assert_eq!(ColoringSpec::CapCp { p: 5 }.eval(&rat(6, 1)).unwrap(), 1);
        assert_eq!(
            ColoringSpec::Cpvn { p: 2, v: 2, n: 3 }
                .eval(&rat(1, 2))
                .unwrap(),
            2
        );
        assert_eq!(
            ColoringSpec::Cpn { p: 2, n: 3 }.eval(&Rational::zero()),
            Err(Error::UndefinedColor)
        );
    }

    #[test]
    fn c4pi_rule() {
        let spec = ColoringSpec::C4pi {
            pi: Permutation(vec![1, 2, 0]),
        };
        // v_2 = 0, 2, 4 -> 0, 1, 2; v_2 = 6 wraps
        assert_eq!(
            spec.restrict(&[rat(1, 1), rat(4, 1), rat(16, 1), rat(64, 1)])
                .unwrap(),
            vec![0, 1, 2, 0]
        );
        // odd valuation: pi(color(2q))
        assert_eq!(spec.eval(&rat(2, 1)).unwrap(), 2); // color(4) = 1, pi(1) = 2
        assert_eq!(spec.eval(&rat(1, 2)).unwrap(), 1); // color(1) = 0, pi(0) = 1
    }

    #[test]
    fn cpi_levels() {
        let mut window = BTreeMap::new();
        window.insert(1, Permutation(vec![2, 1, 4, 3]));
        let spec = ColoringSpec::CPi { p: 5, window };
        spec.validate().unwrap();
        assert_eq!(spec.eval(&rat(5, 1)).unwrap(), 2);
        assert_eq!(spec.eval(&rat(1, 1)).unwrap(), 1);
        assert_eq!(spec.eval(&rat(25, 1)).unwrap(), 1);
    }

    #[test]
    fn validation() {
        let mut window = BTreeMap::new();
        window.insert(0, Permutation(vec![2, 1, 3, 4]));
        assert!(ColoringSpec::CPi { p: 5, window }.validate().is_err());
        assert!(ColoringSpec::C4pi {
            pi: Permutation(vec![0, 0, 1])
        }
        .validate()
        .is_err());
        assert!(ColoringSpec::Cpn { p: 4, n: 3 }.validate().is_err());
        assert!(ColoringSpec::Cpvn { p: 2, v: 0, n: 3 }.validate().is_err());
        let mut classes = BTreeMap::new();
        classes.insert(1, Permutation(vec![1, 0, 2]));
        assert!(ColoringSpec::OddPrimeFamily {
            p: 5,
            n: 3,
            class_perms: classes
        }
        .validate()
        .is_err());
    }

    #[test]
    fn odd_prime_family_properties() {
        let mut classes = BTreeMap::new();
        classes.insert(2, Permutation(vec![2, 0, 1]));
        let spec = ColoringSpec::OddPrimeFamily {
            p: 5,
            n: 3,
            class_perms: classes,
        };
        spec.validate().unwrap();
        for q in [rat(1, 1), rat(2, 1), rat(3, 7), rat(-4, 9), rat(12, 5)] {
            let c = spec.eval(&q).unwrap();
            // period n in the p-adic level
            assert_eq!(spec.eval(&(&q * &rat(125, 1))).unwrap(), c);
            assert_ne!(spec.eval(&(&q * &rat(5, 1))).unwrap(), c);
            // q and -q share residue class
            assert_eq!(spec.eval(&-q.clone()).unwrap(), c);
        }
    }

    #[test]
    fn parses_compact_forms() {
        assert_eq!(
            parse_coloring("cpn:2:3").unwrap(),
            ColoringSpec::Cpn { p: 2, n: 3 }
        );
        assert_eq!(
            parse_coloring("cpvn:3:-2:4").unwrap(),
            ColoringSpec::Cpvn { p: 3, v: -2, n: 4 }
        );
        assert_eq!(
            parse_coloring("c4pi:2,0,1").unwrap(),
            ColoringSpec::C4pi {
                pi: Permutation(vec![2, 0, 1])
            }
        );
        let cpi = parse_coloring("cpi:5:1=2,1,4,3;-2=4,3,2,1").unwrap();
        match cpi {
            ColoringSpec::CPi { p, window } => {
                assert_eq!(p, 5);
                assert_eq!(window.len(), 2);
            }
            _ => panic!(),
        }
        assert!(parse_coloring("oddprime:7:3:2=1,0,2").is_ok());
        assert!(parse_coloring("cpn:2").is_err());
        assert!(parse_coloring("nope:2:3").is_err());
    }

    #[test]
    fn json_discriminator() {
        let spec = ColoringSpec::Cpn { p: 2, n: 3 };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"variant":"Cpn","p":2,"n":3}"#);
        let c4: ColoringSpec = serde_json::from_str(r#"{"variant":"C4pi","pi":[1,0,2]}"#).unwrap();
        assert_eq!(
            c4,
            ColoringSpec::C4pi {
                pi: Permutation(vec![1, 0, 2])
            }
        );
    }

    #[test]
    fn keyed_maps_round_trip() {
        for text in ["oddprime:7:3:2=1,0,2;3=2,1,0", "cpi:5:-1=2,1,4,3;2=4,3,2,1"] {
            let spec = parse_coloring(text).unwrap();
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<ColoringSpec>(&json).unwrap(), spec);
        }
        assert!(serde_json::from_str::<ColoringSpec>(
            r#"{"variant":"CPi","p":5,"window":{"x":[1,2,3,4]}}"#
        )
        .is_err());
    }
}
