mod common;

#[test]
fn daniel_hypothesis_is_optimal() {
    assert_eq!(common::daniel::check(), Ok(3));
}
