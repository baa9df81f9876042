//! Convert SonarQube and CK exports into canonical records, drop
//! non-engineering repositories, and normalize by size.
//!
//!     cargo run --example ingest_scanners

use metriq::corpus::{
    filter_non_engineering, ingest_ck_classes, ingest_sonarqube, normalize, registry, ColumnMap,
    DEFAULT_FILTER_PATTERNS,
};

const SONAR: &str = "\
project_key,language,stars,description,ncloc,lines,comment_lines,files,statements,complexity,cognitive_complexity,code_smells,violations,critical_violations,info_violations,lines_to_cover,duplicated_blocks,duplicated_files,duplicated_lines
acme/engine,java,900,Fast rendering engine,10000,13000,1500,120,4000,1500,800,120,130,4,9,5000,12,6,600
snyk/awesome-java,java,40000,A curated list of awesome Java frameworks,300,400,20,4,100,12,4,1,1,0,0,50,0,0,0
";

const CK: &str = "\
project,class,cbo,fanin,fanout,dit,noc,lcom,tcc,lcc
acme/engine,Renderer,8,3,5,2,0,12,0.4,0.7
acme/engine,Scene,4,6,2,1,3,3,NaN,0.5
";

fn main() -> metriq::Result<()> {
    let dir = tempfile_dir();
    let sonar = dir.join("sonar.csv");
    let ck = dir.join("ck.csv");
    std::fs::write(&sonar, SONAR).expect("write sonar export");
    std::fs::write(&ck, CK).expect("write ck export");

    let map = ColumnMap::default();
    let records = ingest_sonarqube(&sonar, &map)?;
    let records = ingest_ck_classes(&ck, &map, records)?;
    let (kept, dropped) = filter_non_engineering(records, &DEFAULT_FILTER_PATTERNS);
    for r in &dropped {
        println!("dropped {:<20} \"{}\"", r.repo_id, r.name_text);
    }
    for r in &kept {
        let v = normalize(r, registry())?;
        println!(
            "kept    {} ({} metrics, {} missing)",
            r.repo_id,
            v.values.len(),
            v.missing.len()
        );
        for (name, x) in &v.values {
            println!("  {name:<24} {x:.4}");
        }
    }
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("metriq-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create scratch directory");
    dir
}
