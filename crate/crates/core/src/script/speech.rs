/// Trigger words closer than this (normalized edit distance) are rejected.
pub const SPEECH_MIN_DISTANCE: f64 = 0.4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeechCollision {
    pub a: String,
    pub b: String,
}

/// Levenshtein distance divided by the longer word's length (in chars).
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Reject the first pair of words that a recognizer could confuse.
pub fn validate_speech_set<S: AsRef<str>>(words: &[S]) -> Result<(), SpeechCollision> {
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            let (a, b) = (a.as_ref(), b.as_ref());
            if normalized_levenshtein(a, b) < SPEECH_MIN_DISTANCE {
                return Err(SpeechCollision { a: a.to_string(), b: b.to_string() });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_cut_is_accepted() {
        // substitute a->c and c->u, keep t, delete i, o, n
        assert!((normalized_levenshtein("action", "cut") - 5.0 / 6.0).abs() < 1e-12);
        assert!(validate_speech_set(&["action", "cut"]).is_ok());
    }

    #[test]
    fn close_words_are_rejected() {
        assert!(validate_speech_set(&["go", "go"]).is_err());
        assert!((normalized_levenshtein("pan", "pen") - 1.0 / 3.0).abs() < 1e-12);
        let err = validate_speech_set(&["action", "pan", "pen"]).unwrap_err();
        assert_eq!(err, SpeechCollision { a: "pan".into(), b: "pen".into() });
    }
}
