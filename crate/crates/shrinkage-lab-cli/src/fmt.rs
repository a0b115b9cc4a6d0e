//! %.17g-equivalent float formatting: 17 significant digits, fixed
//! notation for exponents in [-4, 17), scientific otherwise, trailing
//! zeros trimmed. 17 digits round-trip f64 exactly, so identical configs
//! reproduce identical CSV bytes.

pub fn g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{:.16e}", v);
    let epos = sci.find('e').expect("scientific format");
    let exp: i32 = sci[epos + 1..].parse().expect("exponent");

    if (-4..17).contains(&exp) {
        let prec = (16 - exp).max(0) as usize;
        let fixed = format!("{:.*}", prec, v);
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = sci[..epos].trim_end_matches('0').trim_end_matches('.');
        let (sign, abs) = if exp < 0 { ('-', -exp) } else { ('+', exp) };
        format!("{mantissa}e{sign}{abs:02}")
    }
}
