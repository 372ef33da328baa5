//! US state and District of Columbia postal codes.

pub const STATE_CODES: [&str; 51] = [
    "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DC", "DE", "FL", "GA", "HI", "IA", "ID", "IL", "IN",
    "KS", "KY", "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH", "NJ",
    "NM", "NV", "NY", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VA", "VT", "WA",
    "WI", "WV", "WY",
];

/// Normalizes `code` to upper case and returns it when it names a state or DC.
pub fn canonical_state(code: &str) -> Option<&'static str> {
    let upper = code.trim().to_ascii_uppercase();
    STATE_CODES.binary_search(&upper.as_str()).ok().map(|i| STATE_CODES[i])
}
