use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use threepass_core::{parse_group, zoo, AbelianActionGroup};

/// Where the public group comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Klein,
    Cyclic(usize),
    Product(Vec<u64>),
    TwoOrbitCyclic(usize),
    NonfaithfulZ2Z2,
    File(PathBuf),
}

impl GroupSpec {
    pub fn load(&self) -> Result<AbelianActionGroup> {
        Ok(match self {
            GroupSpec::Klein => zoo::klein(),
            GroupSpec::Cyclic(n) => zoo::cyclic(*n),
            GroupSpec::Product(orders) => zoo::product_regular(orders),
            GroupSpec::TwoOrbitCyclic(n) => zoo::two_orbit_cyclic(*n),
            GroupSpec::NonfaithfulZ2Z2 => zoo::nonfaithful_z2z2(),
            GroupSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let id = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .filter(|s| !s.is_empty() && !s.contains(char::is_whitespace))
                    .unwrap_or("file")
                    .to_string();
                parse_group(&text)
                    .with_context(|| format!("loading group from {}", path.display()))?
                    .with_id(id)
            }
        })
    }
}

fn positive(s: &str, what: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => bail!("{what} must be a positive integer, got `{s}`"),
    }
}

impl FromStr for GroupSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        Ok(match (name, arg) {
            ("klein", None) => GroupSpec::Klein,
            ("nonfaithful_z2z2", None) => GroupSpec::NonfaithfulZ2Z2,
            ("cyclic", Some(n)) => GroupSpec::Cyclic(positive(n, "cyclic order")?),
            ("two_orbit_cyclic", Some(n)) => {
                GroupSpec::TwoOrbitCyclic(positive(n, "cycle length")?)
            }
            ("product", Some(list)) => GroupSpec::Product(
                list.split('x')
                    .map(|o| positive(o, "factor order").map(|o| o as u64))
                    .collect::<Result<_>>()?,
            ),
            ("file", Some(path)) if !path.is_empty() => GroupSpec::File(PathBuf::from(path)),
            _ => bail!(
                "unknown group `{s}`; expected klein, cyclic:<n>, product:<a>x<b>..., \
                 two_orbit_cyclic:<n>, nonfaithful_z2z2 or file:<path>"
            ),
        })
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Klein => write!(f, "klein"),
            GroupSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupSpec::Product(o) => {
                let parts: Vec<String> = o.iter().map(|x| x.to_string()).collect();
                write!(f, "product:{}", parts.join("x"))
            }
            GroupSpec::TwoOrbitCyclic(n) => write!(f, "two_orbit_cyclic:{n}"),
            GroupSpec::NonfaithfulZ2Z2 => write!(f, "nonfaithful_z2z2"),
            GroupSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtins() {
        assert_eq!("klein".parse::<GroupSpec>().unwrap(), GroupSpec::Klein);
        assert_eq!("cyclic:101".parse::<GroupSpec>().unwrap(), GroupSpec::Cyclic(101));
        assert_eq!(
            "product:2x4x9".parse::<GroupSpec>().unwrap(),
            GroupSpec::Product(vec![2, 4, 9])
        );
        assert_eq!(
            "two_orbit_cyclic:3".parse::<GroupSpec>().unwrap(),
            GroupSpec::TwoOrbitCyclic(3)
        );
        for bad in ["cyclic", "cyclic:0", "product:2x", "file:", "klein:3", "s3"] {
            assert!(bad.parse::<GroupSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn builtin_ids_match_spec_strings() {
        for s in ["klein", "cyclic:7", "product:2x4", "two_orbit_cyclic:3", "nonfaithful_z2z2"] {
            let spec: GroupSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(spec.load().unwrap().id(), s);
        }
    }
}
