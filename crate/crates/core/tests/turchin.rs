//! Turchin's relation on the path of the non-transitivity example.

mod support;

use scpv_core::relations::turchin;
use support::a3::{path, show};

#[test]
fn the_path_matches_the_printed_timed_configurations() {
    let cs: Vec<String> = path().iter().map(|c| c.to_string()).collect();
    let expected = [
        "Main#0(e.0), •",
        "Fab#3(e.0), Fb#2(•), C#1(•), •",
        "Fab#5(e.0), Fc#4(•), Fb#2(•), C#1(•), •",
        "Fc#4('c'), Fb#2(•), C#1(•), •",
        "Fb#2('d' 'd'), C#1(•), •",
        "F#8('d'), Fb#7(•), E#6('d' •), C#1(•), •",
        "Fab#10('d'), Fc#9(•), Fb#7(•), E#6('d' •), C#1(•), •",
    ];
    assert_eq!(cs, expected);
}

#[test]
fn two_before_three() {
    let cs = path();
    let w = turchin(&cs[1], &cs[2]).expect("[2] ⊲ [3]");
    assert_eq!(show(&w.context), "Fb#2(•), C#1(•)");
    assert_eq!(show(&w.prefix_i), "Fab#3(e.0)");
    assert_eq!(show(&w.prefix_j), "Fab#5(e.0)");
}

#[test]
fn three_before_seven() {
    let cs = path();
    let w = turchin(&cs[2], &cs[6]).expect("[3] ⊲ [7]");
    assert_eq!(show(&w.context), "C#1(•)");
    assert_eq!(show(&w.prefix_i), "Fab#5(e.0), Fc#4(•), Fb#2(•)");
    assert_eq!(show(&w.prefix_j), "Fab#10('d'), Fc#9(•), Fb#7(•)");
}

#[test]
fn two_not_before_seven() {
    let cs = path();
    assert!(turchin(&cs[1], &cs[6]).is_none());
}
