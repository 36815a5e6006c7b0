use std::path::Path;

fn main() {
    let dir = Path::new("corpus");
    std::fs::create_dir_all(dir).unwrap();
    outer_dynamics::corpus::write_corpus(dir).unwrap();
    println!("corpus written");
}
