//! Porter's suffix-stripping algorithm: the published five-step rule set,
//! implemented in full over ASCII lowercase words.
//!
//! A word is modelled as `[C](VC)^m[V]` where `m` is the *measure* of the
//! stem under inspection. `y` counts as a vowel when preceded by a
//! consonant, otherwise as a consonant. Each step finds the longest
//! matching suffix among its rules, tests that rule's condition on the
//! remaining stem, and applies at most one rewrite.

/// Stem a single lowercase word.
///
/// Words of length one or two, and words containing anything outside
/// `a..z`, are returned unchanged.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = word.as_bytes().to_vec();
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    String::from_utf8(w).expect("stemmer operates on ASCII")
}

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Measure of `w[..len]`: the number of VC sequences in `[C](VC)^m[V]`.
fn measure(w: &[u8], len: usize) -> usize {
    let mut m = 0;
    let mut i = 0;
    while i < len && is_consonant(w, i) {
        i += 1;
    }
    loop {
        while i < len && !is_consonant(w, i) {
            i += 1;
        }
        if i == len {
            break;
        }
        while i < len && is_consonant(w, i) {
            i += 1;
        }
        m += 1;
        if i == len {
            break;
        }
    }
    m
}

fn has_vowel(w: &[u8], len: usize) -> bool {
    (0..len).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: stem ends consonant-vowel-consonant where the final consonant is
/// not `w`, `x` or `y`.
fn ends_cvc(w: &[u8], len: usize) -> bool {
    if len < 3 {
        return false;
    }
    is_consonant(w, len - 3)
        && !is_consonant(w, len - 2)
        && is_consonant(w, len - 1)
        && !matches!(w[len - 1], b'w' | b'x' | b'y')
}

fn ends_with(w: &[u8], suffix: &[u8]) -> bool {
    w.len() > suffix.len() && w[w.len() - suffix.len()..] == *suffix
}

fn set_suffix(w: &mut Vec<u8>, suffix_len: usize, replacement: &[u8]) {
    let keep = w.len() - suffix_len;
    w.truncate(keep);
    w.extend_from_slice(replacement);
}

fn step1a(w: &mut Vec<u8>) {
    if ends_with(w, b"sses") {
        set_suffix(w, 4, b"ss");
    } else if ends_with(w, b"ies") {
        set_suffix(w, 3, b"i");
    } else if ends_with(w, b"ss") {
        // unchanged
    } else if ends_with(w, b"s") {
        set_suffix(w, 1, b"");
    }
}

fn step1b(w: &mut Vec<u8>) {
    if ends_with(w, b"eed") {
        if measure(w, w.len() - 3) > 0 {
            set_suffix(w, 1, b"");
        }
        return;
    }
    let removed = if ends_with(w, b"ed") && has_vowel(w, w.len() - 2) {
        set_suffix(w, 2, b"");
        true
    } else if ends_with(w, b"ing") && has_vowel(w, w.len() - 3) {
        set_suffix(w, 3, b"");
        true
    } else {
        false
    };
    if !removed {
        return;
    }
    if ends_with(w, b"at") || ends_with(w, b"bl") || ends_with(w, b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(w, w.len()) == 1 && ends_cvc(w, w.len()) {
        w.push(b'e');
    }
}

fn step1c(w: &mut Vec<u8>) {
    if ends_with(w, b"y") && has_vowel(w, w.len() - 1) {
        let last = w.len() - 1;
        w[last] = b'i';
    }
}

const STEP2_RULES: &[(&[u8], &[u8])] = &[
    (b"ational", b"ate"),
    (b"ization", b"ize"),
    (b"iveness", b"ive"),
    (b"fulness", b"ful"),
    (b"ousness", b"ous"),
    (b"tional", b"tion"),
    (b"biliti", b"ble"),
    (b"entli", b"ent"),
    (b"ousli", b"ous"),
    (b"ation", b"ate"),
    (b"alism", b"al"),
    (b"aliti", b"al"),
    (b"iviti", b"ive"),
    (b"enci", b"ence"),
    (b"anci", b"ance"),
    (b"izer", b"ize"),
    (b"abli", b"able"),
    (b"alli", b"al"),
    (b"ator", b"ate"),
    (b"eli", b"e"),
];

const STEP3_RULES: &[(&[u8], &[u8])] = &[
    (b"icate", b"ic"),
    (b"ative", b""),
    (b"alize", b"al"),
    (b"iciti", b"ic"),
    (b"ical", b"ic"),
    (b"ness", b""),
    (b"ful", b""),
];

const STEP4_SUFFIXES: &[&[u8]] = &[
    b"ement", b"ance", b"ence", b"able", b"ible", b"ment", b"ant", b"ent", b"ion", b"ism", b"ate",
    b"iti", b"ous", b"ive", b"ize", b"ou", b"al", b"er", b"ic",
];

/// Apply the first (longest) matching rule from `rules` whose stem measure
/// exceeds `min_measure`. The rule tables above are ordered longest suffix
/// first so the scan finds the longest match.
fn apply_rule_table(w: &mut Vec<u8>, rules: &[(&[u8], &[u8])], min_measure: usize) {
    for (suffix, replacement) in rules {
        if ends_with(w, suffix) {
            if measure(w, w.len() - suffix.len()) > min_measure {
                set_suffix(w, suffix.len(), replacement);
            }
            return;
        }
    }
}

fn step2(w: &mut Vec<u8>) {
    apply_rule_table(w, STEP2_RULES, 0);
}

fn step3(w: &mut Vec<u8>) {
    apply_rule_table(w, STEP3_RULES, 0);
}

fn step4(w: &mut Vec<u8>) {
    for suffix in STEP4_SUFFIXES {
        if ends_with(w, suffix) {
            let stem_len = w.len() - suffix.len();
            if measure(w, stem_len) > 1 {
                // The `ion` rule additionally requires the stem to end in s or t.
                if *suffix == b"ion" && !matches!(w[stem_len - 1], b's' | b't') {
                    return;
                }
                set_suffix(w, suffix.len(), b"");
            }
            return;
        }
    }
}

fn step5a(w: &mut Vec<u8>) {
    if w.last() != Some(&b'e') {
        return;
    }
    let stem_len = w.len() - 1;
    let m = measure(w, stem_len);
    if m > 1 || (m == 1 && !ends_cvc(w, stem_len)) {
        w.pop();
    }
}

fn step5b(w: &mut Vec<u8>) {
    if measure(w, w.len()) > 1 && ends_double_consonant(w) && w[w.len() - 1] == b'l' {
        w.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plural_stripping() {
        assert_eq!(stem("ponds"), "pond");
        assert_eq!(stem("caresses"), "caress");
        assert_eq!(stem("ponies"), "poni");
        assert_eq!(stem("ties"), "ti");
        assert_eq!(stem("caress"), "caress");
        assert_eq!(stem("cats"), "cat");
        assert_eq!(stem("gardens"), "garden");
        assert_eq!(stem("paths"), "path");
    }

    #[test]
    fn ed_ing_endings() {
        assert_eq!(stem("walking"), "walk");
        assert_eq!(stem("feed"), "feed");
        assert_eq!(stem("agreed"), "agre");
        assert_eq!(stem("plastered"), "plaster");
        assert_eq!(stem("bled"), "bled");
        assert_eq!(stem("motoring"), "motor");
        assert_eq!(stem("sing"), "sing");
        assert_eq!(stem("conflated"), "conflat");
        assert_eq!(stem("troubled"), "troubl");
        assert_eq!(stem("sized"), "size");
        assert_eq!(stem("hopping"), "hop");
        assert_eq!(stem("tanned"), "tan");
        assert_eq!(stem("falling"), "fall");
        assert_eq!(stem("hissing"), "hiss");
        assert_eq!(stem("fizzed"), "fizz");
        assert_eq!(stem("failing"), "fail");
        assert_eq!(stem("filing"), "file");
    }

    #[test]
    fn y_to_i() {
        assert_eq!(stem("happy"), "happi");
        assert_eq!(stem("sky"), "sky");
    }

    #[test]
    fn multi_step_words() {
        assert_eq!(stem("beautiful"), "beauti");
        assert_eq!(stem("relational"), "relat");
        assert_eq!(stem("conditional"), "condit");
        assert_eq!(stem("generalization"), "gener");
        assert_eq!(stem("oscillators"), "oscil");
        assert_eq!(stem("adoption"), "adopt");
        assert_eq!(stem("agreement"), "agreement");
        assert_eq!(stem("adjustable"), "adjust");
        assert_eq!(stem("effective"), "effect");
        assert_eq!(stem("sensitivity"), "sensit");
        assert_eq!(stem("lovely"), "love");
        assert_eq!(stem("goodness"), "good");
        assert_eq!(stem("hopeful"), "hope");
    }

    #[test]
    fn fixpoints_and_short_words() {
        assert_eq!(stem("run"), "run");
        assert_eq!(stem("a"), "a");
        assert_eq!(stem("at"), "at");
        assert_eq!(stem("rate"), "rate");
    }

    #[test]
    fn non_ascii_left_alone() {
        assert_eq!(stem("café"), "café");
        assert_eq!(stem("not_clean"), "not_clean");
    }

    #[test]
    fn stemming_is_idempotent_on_common_stems() {
        for word in [
            "walking", "beautiful", "gardens", "ponds", "relaxing", "peaceful", "crowded",
            "littered", "charming", "delightful", "visiting", "playgrounds", "happy",
        ] {
            let once = stem(word);
            assert_eq!(stem(&once), once, "stem of {word:?} is not a fixpoint");
        }
    }
}
