use std::ffi::CString;
use std::ptr;

use dipeps_ffi::*;

#[test]
fn random_di_round_trip() {
    let mut t: *mut DipepsTensor = ptr::null_mut();
    unsafe {
        assert_eq!(dipeps_random_di(3, 2, 7, &mut t), DipepsStatus::Ok);
        let (mut d, mut chi) = (0, 0);
        assert_eq!(dipeps_tensor_dims(t, &mut d, &mut chi), DipepsStatus::Ok);
        assert_eq!((d, chi), (3, 2));
        let (mut ri, mut rd, mut pass) = (1.0, 1.0, false);
        assert_eq!(dipeps_check_di(t, 1e-12, &mut ri, &mut rd, &mut pass), DipepsStatus::Ok);
        assert!(pass && ri < 1e-12 && rd < 1e-12);
        dipeps_tensor_free(t);
    }
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut t: *mut DipepsTensor = ptr::null_mut();
    unsafe {
        assert_eq!(dipeps_random_di(2, 5, 0, &mut t), DipepsStatus::InvalidInput);
        assert!(t.is_null());
        assert_eq!(dipeps_random_di(2, 2, 0, ptr::null_mut()), DipepsStatus::NullPointer);
        assert_eq!(dipeps_tensor_from_json(ptr::null(), &mut t), DipepsStatus::NullPointer);
        let junk = CString::new("{\"d\": 2}").unwrap();
        assert_eq!(dipeps_tensor_from_json(junk.as_ptr(), &mut t), DipepsStatus::InvalidInput);
        let mut x = 0.0;
        assert_eq!(dipeps_transfer_leading(1.5, 0.5, 4, false, false, &mut x), DipepsStatus::InvalidInput);
        dipeps_tensor_free(ptr::null_mut());
    }
}

#[test]
fn json_tensor_checks_like_the_library() {
    let data: Vec<String> = (0..32).map(|i| format!("[{}, 0.0]", (i % 3) as f64)).collect();
    let json = CString::new(format!("{{\"d\": 2, \"chi\": 2, \"data\": [{}]}}", data.join(","))).unwrap();
    let mut t: *mut DipepsTensor = ptr::null_mut();
    unsafe {
        assert_eq!(dipeps_tensor_from_json(json.as_ptr(), &mut t), DipepsStatus::Ok);
        let (mut ri, mut rd, mut pass) = (0.0, 0.0, true);
        assert_eq!(dipeps_check_di(t, 1e-10, &mut ri, &mut rd, &mut pass), DipepsStatus::Ok);
        assert!(!pass && ri > 1.0);
        dipeps_tensor_free(t);
    }
}

#[test]
fn toric_code_and_counts() {
    let mut t: *mut DipepsTensor = ptr::null_mut();
    unsafe {
        assert_eq!(dipeps_toric_code(&mut t), DipepsStatus::Ok);
        let (mut ri, mut rd, mut pass) = (1.0, 1.0, false);
        dipeps_check_di(t, 1e-12, &mut ri, &mut rd, &mut pass);
        assert!(pass);
        dipeps_tensor_free(t);
        let (mut a, mut b, mut c) = (0, 0, 0);
        assert_eq!(dipeps_param_counts(2, 2, &mut a, &mut b, &mut c), DipepsStatus::Ok);
        assert_eq!((a, b, c), (36, 50, 32));
    }
}

#[test]
fn transfer_leading_at_toric_point() {
    let mut x = 0.0;
    unsafe {
        for odd in [false, true] {
            assert_eq!(dipeps_transfer_leading(0.5, 0.5, 6, false, odd, &mut x), DipepsStatus::Ok);
            assert!((x - 1.0).abs() < 1e-12);
        }
        assert_eq!(dipeps_transfer_leading(0.3, 0.3, 4, false, false, &mut x), DipepsStatus::Ok);
        assert!((x - (1.0 + 0.4f64.powi(4))).abs() < 1e-12);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dipeps.h")).unwrap();
    assert!(h.contains("#ifndef DIPEPS_H"));
    for name in ["dipeps_random_di", "dipeps_tensor_free", "dipeps_check_di", "dipeps_transfer_leading", "DipepsStatus"] {
        assert!(h.contains(name), "{name} missing");
    }
}
