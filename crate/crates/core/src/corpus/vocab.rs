//! Token ↔ id mapping frozen at corpus-build time.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense bijective token→id map. Ids are assigned in first-appearance order
/// over the corpus, so the mapping is deterministic for a given document
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    /// Build from already-ordered unique tokens.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut token_to_id = HashMap::new();
        let mut id_to_token = Vec::new();
        for token in tokens {
            let token = token.into();
            let id = id_to_token.len() as u32;
            if token_to_id.insert(token.clone(), id).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate vocabulary token {token:?}"
                )));
            }
            id_to_token.push(token);
        }
        Ok(Self {
            token_to_id,
            id_to_token,
        })
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.id_to_token
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        Vocabulary::from_tokens(tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bijective_round_trip() {
        let v = Vocabulary::from_tokens(["march", "resid", "municip"]).unwrap();
        assert_eq!(v.len(), 3);
        for id in 0..v.len() as u32 {
            let token = v.token(id).unwrap();
            assert_eq!(v.id(token), Some(id));
        }
        assert_eq!(v.id("absent"), None);
        assert_eq!(v.token(99), None);
    }

    #[test]
    fn duplicate_token_rejected() {
        assert!(Vocabulary::from_tokens(["a", "b", "a"]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let v = Vocabulary::from_tokens(["a", "b"]).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"["a","b"]"#);
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
