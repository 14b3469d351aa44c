//! Plain-text formats.
//!
//! - ranking: names joined by `" > "`, best first (`c > e > b > f > a > d`)
//! - axis: names joined by `" < "`, left to right
//! - profile file: a header line `#alternatives: a,b,c` fixing the name/id
//!   mapping, then one ranking per line. Blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::types::{AlternativeId, OrdinalAxis, Profile, Ranking};
use crate::CoreError;

const PROFILE_HEADER: &str = "#alternatives:";

/// Display names of the alternatives; the index of a name is its id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternatives {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alternatives {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, CoreError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.contains(['>', '<', ',', '\n']) || name.trim() != name {
                return Err(CoreError::Parse(format!("invalid alternative name {name:?}")));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(CoreError::Parse(format!("duplicate alternative name {name:?}")));
            }
        }
        Ok(Alternatives { names, index })
    }

    /// `a, b, c, …`; beyond 26 the names continue as `a1, b1, …`.
    pub fn letters(m: usize) -> Self {
        let names = (0..m).map(|i| {
            let letter = char::from(b'a' + (i % 26) as u8);
            match i / 26 {
                0 => letter.to_string(),
                k => format!("{letter}{k}"),
            }
        });
        Self::new(names).expect("generated names are valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: AlternativeId) -> &str {
        &self.names[id.index()]
    }

    pub fn id(&self, name: &str) -> Result<AlternativeId, CoreError> {
        self.index
            .get(name.trim())
            .map(|&i| AlternativeId::new(i))
            .ok_or_else(|| CoreError::Parse(format!("unknown alternative {:?}", name.trim())))
    }

    fn parse_sequence(&self, text: &str, separator: char) -> Result<Vec<AlternativeId>, CoreError> {
        let ids = text
            .split(separator)
            .map(|name| self.id(name))
            .collect::<Result<Vec<_>, _>>()?;
        if ids.len() != self.len() {
            return Err(CoreError::SizeMismatch {
                expected: self.len(),
                found: ids.len(),
            });
        }
        Ok(ids)
    }

    pub fn parse_ranking(&self, text: &str) -> Result<Ranking, CoreError> {
        Ranking::new(self.parse_sequence(text, '>')?)
    }

    pub fn parse_axis(&self, text: &str) -> Result<OrdinalAxis, CoreError> {
        OrdinalAxis::new(self.parse_sequence(text, '<')?)
    }

    pub fn parse_names(&self, names: &[impl AsRef<str>]) -> Result<Vec<AlternativeId>, CoreError> {
        names.iter().map(|n| self.id(n.as_ref())).collect()
    }

    fn join(&self, ids: &[AlternativeId], separator: &str) -> String {
        let names: Vec<&str> = ids.iter().map(|&id| self.name(id)).collect();
        names.join(separator)
    }

    pub fn format_ranking(&self, ranking: &Ranking) -> String {
        self.join(ranking.order(), " > ")
    }

    pub fn format_axis(&self, axis: &OrdinalAxis) -> String {
        self.join(axis.order(), " < ")
    }

    pub fn ranking_names(&self, ranking: &Ranking) -> Vec<String> {
        ranking.iter().map(|id| self.name(id).to_string()).collect()
    }
}

/// Parses a profile file. The header is required.
pub fn parse_profile(text: &str) -> Result<(Alternatives, Profile), CoreError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix(PROFILE_HEADER))
        .ok_or_else(|| CoreError::Parse(format!("profile must start with {PROFILE_HEADER:?}")))?;
    let names = Alternatives::new(header.split(',').map(str::trim))?;
    let votes = lines
        .map(|l| names.parse_ranking(l))
        .collect::<Result<Vec<_>, _>>()?;
    let profile = Profile::new(names.len(), votes)?;
    Ok((names, profile))
}

pub fn format_profile(names: &Alternatives, profile: &Profile) -> String {
    let mut out = format!("{PROFILE_HEADER} {}\n", names.names().join(","));
    for vote in profile.votes() {
        let _ = writeln!(out, "{}", names.format_ranking(vote));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_round_trip() {
        let names = Alternatives::letters(6);
        let r = names.parse_ranking("c > e > b > f > a > d").unwrap();
        assert_eq!(r.order(), &[2, 4, 1, 5, 0, 3].map(AlternativeId::new));
        assert_eq!(names.format_ranking(&r), "c > e > b > f > a > d");
        let axis = names.parse_axis("d<b<e<f<a<c").unwrap();
        assert_eq!(names.format_axis(&axis), "d < b < e < f < a < c");
    }

    #[test]
    fn rejects_bad_rankings() {
        let names = Alternatives::letters(3);
        assert!(names.parse_ranking("a > b").is_err());
        assert!(names.parse_ranking("a > b > z").is_err());
        assert!(names.parse_ranking("a > b > a").is_err());
        assert!(Alternatives::new(["x", "x"]).is_err());
        assert!(Alternatives::new(["x>y"]).is_err());
    }

    #[test]
    fn profile_round_trip() {
        let text = "#alternatives: a,b,c,d\nb > c > a > d\nc > d > b > a\n\na > b > c > d\n";
        let (names, profile) = parse_profile(text).unwrap();
        assert_eq!(profile.voters(), 3);
        assert_eq!(profile.alternatives(), 4);
        assert_eq!(
            format_profile(&names, &profile),
            "#alternatives: a,b,c,d\nb > c > a > d\nc > d > b > a\na > b > c > d\n"
        );
        assert!(parse_profile("a > b\n").is_err());
    }

    #[test]
    fn letters_beyond_the_alphabet() {
        let names = Alternatives::letters(30);
        assert_eq!(names.name(AlternativeId::new(25)), "z");
        assert_eq!(names.name(AlternativeId::new(27)), "b1");
    }
}
