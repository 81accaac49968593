fn main() {
    println!("medfam: placeholder");
}
