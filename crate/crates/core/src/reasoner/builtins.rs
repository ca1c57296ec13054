use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::asp::Term;

type BuiltinFn = dyn Fn(&[Term]) -> Result<Term, String> + Send + Sync;

/// Named pure functions callable from rule guards as `@name(args)`.
#[derive(Clone)]
pub struct BuiltinRegistry {
    funcs: BTreeMap<String, Arc<BuiltinFn>>,
}

impl BuiltinRegistry {
    pub fn empty() -> Self {
        BuiltinRegistry { funcs: BTreeMap::new() }
    }

    pub fn register<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn(&[Term]) -> Result<Term, String> + Send + Sync + 'static,
    {
        self.funcs.insert(name.into(), Arc::new(f));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.funcs.contains_key(name)
    }

    pub fn call(&self, name: &str, args: &[Term]) -> Option<Result<Term, String>> {
        self.funcs.get(name).map(|f| f(args))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.funcs.keys().map(String::as_str)
    }
}

impl Default for BuiltinRegistry {
    /// Registry with `lte_dates`.
    fn default() -> Self {
        let mut reg = BuiltinRegistry::empty();
        reg.register("lte_dates", |args| {
            let [a, b] = args else {
                return Err(format!("lte_dates expects 2 arguments, got {}", args.len()));
            };
            let a = a.as_str().ok_or_else(|| format!("lte_dates: {a} is not a string"))?;
            let b = b.as_str().ok_or_else(|| format!("lte_dates: {b} is not a string"))?;
            let result = lte_dates(a, b)?;
            Ok(Term::Symbol(if result { "true" } else { "false" }.into()))
        });
        reg
    }
}

impl fmt::Debug for BuiltinRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.funcs.keys()).finish()
    }
}

/// A validated Gregorian calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CalendarDate {
    pub year: u32,
    pub month: u32,
    pub day: u32,
}

pub fn is_leap_year(year: u32) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

pub fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

/// Parses strict `MM/DD/YYYY`.
pub fn parse_date(text: &str) -> Result<CalendarDate, String> {
    let bytes = text.as_bytes();
    let well_formed = bytes.len() == 10
        && bytes[2] == b'/'
        && bytes[5] == b'/'
        && bytes.iter().enumerate().all(|(i, b)| i == 2 || i == 5 || b.is_ascii_digit());
    if !well_formed {
        return Err(format!("`{text}` is not a MM/DD/YYYY date"));
    }
    let month: u32 = text[0..2].parse().map_err(|_| format!("bad month in `{text}`"))?;
    let day: u32 = text[3..5].parse().map_err(|_| format!("bad day in `{text}`"))?;
    let year: u32 = text[6..10].parse().map_err(|_| format!("bad year in `{text}`"))?;
    if !(1..=12).contains(&month) {
        return Err(format!("month {month} out of range in `{text}`"));
    }
    if day == 0 || day > days_in_month(year, month) {
        return Err(format!("day {day} out of range for {month:02}/{year} in `{text}`"));
    }
    Ok(CalendarDate { year, month, day })
}

/// `true` iff `d1` is on or before `d2`.
pub fn lte_dates(d1: &str, d2: &str) -> Result<bool, String> {
    Ok(parse_date(d1)? <= parse_date(d2)?)
}
