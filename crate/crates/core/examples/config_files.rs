//! Parse a config, show the validation errors, and round-trip it.

use cvbridge::config::{parse_config, parse_document, serialize};

const TEXT: &str = r#"
[source]
squeezing_db = -8.3
antisqueezing_db = 11.8

[vbs]
t = 0.7

[arm_1550]
efficiency_power = 0.88
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = parse_document(TEXT)?;
    let text = serialize(&doc);
    print!("{text}");
    assert_eq!(parse_document(&text)?, doc);

    for bad in [
        "[arm_1550]\nefficiency_power = 1.2\n",
        "[vbs]\nt = 0.5\nmode = \"balance\"\n",
        "[detector]\nphase = 0\n",
    ] {
        let err = parse_config(bad).unwrap_err();
        eprintln!("{:<16} {err}", err.code());
    }
    Ok(())
}
