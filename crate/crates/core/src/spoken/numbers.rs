//! Spoken cardinals and ordinals.

const UNITS: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];

const TENS: [&str; 8] = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];

const ORDINALS: [&str; 12] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth", "eleventh",
    "twelfth",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberWord {
    Unit(u64),
    Tens(u64),
    Hundred,
    Thousand,
}

pub fn classify(word: &str) -> Option<NumberWord> {
    if let Some(i) = UNITS.iter().position(|w| *w == word) {
        return Some(NumberWord::Unit(i as u64));
    }
    if let Some(i) = TENS.iter().position(|w| *w == word) {
        return Some(NumberWord::Tens(20 + 10 * i as u64));
    }
    match word {
        "hundred" => Some(NumberWord::Hundred),
        "thousand" => Some(NumberWord::Thousand),
        _ => None,
    }
}

/// Ordinal value, including "nth" as `None` inside `Some`.
pub fn ordinal(word: &str) -> Option<Option<u64>> {
    if word == "nth" {
        return Some(None);
    }
    ORDINALS.iter().position(|w| *w == word).map(|i| Some(i as u64 + 1))
}

pub fn is_number_word(word: &str) -> bool {
    classify(word).is_some() || ordinal(word).is_some()
}

/// Reads the longest cardinal prefix of `words`; returns its value and the
/// number of words used.
pub fn parse_cardinal(words: &[&str]) -> Option<(u64, usize)> {
    let mut total: u64 = 0;
    let mut hundreds: Option<u64> = None;
    let mut tens: Option<u64> = None;
    let mut unit: Option<u64> = None;
    let mut thousands = false;
    let mut used = 0;
    let mut zero = false;

    for w in words {
        let Some(class) = classify(w) else { break };
        let chunk_empty = hundreds.is_none() && tens.is_none() && unit.is_none();
        match class {
            NumberWord::Unit(0) if used == 0 => {
                zero = true;
                used = 1;
                break;
            }
            NumberWord::Unit(0) => break,
            NumberWord::Unit(u) => {
                if unit.is_some() || (tens.is_some() && u >= 10) {
                    break;
                }
                unit = Some(u);
            }
            NumberWord::Tens(t) => {
                if tens.is_some() || unit.is_some() {
                    break;
                }
                tens = Some(t);
            }
            NumberWord::Hundred => {
                if hundreds.is_some() || tens.is_some() || unit.is_some_and(|u| u >= 10) {
                    break;
                }
                hundreds = Some(unit.take().unwrap_or(1) * 100);
            }
            NumberWord::Thousand => {
                if thousands || chunk_empty && used > 0 {
                    break;
                }
                let chunk = hundreds.take().unwrap_or(0) + tens.take().unwrap_or(0) + unit.take().unwrap_or(0);
                total = chunk.max(1) * 1000;
                thousands = true;
            }
        }
        used += 1;
    }
    if zero {
        return Some((0, 1));
    }
    if used == 0 {
        return None;
    }
    Some((total + hundreds.unwrap_or(0) + tens.unwrap_or(0) + unit.unwrap_or(0), used))
}

/// A single spoken digit, for the part after "point".
pub fn digit(word: &str) -> Option<u64> {
    UNITS[..10].iter().position(|w| *w == word).map(|i| i as u64)
}
