"""Tests for class remapping, abundance/size filtering, and annotation checks."""

from collections import defaultdict

import pytest
from hypothesis import given, strategies as st

from reefeval import (
    CurationPlan,
    Dataset,
    FamilyClassMap,
    GroundTruthBox,
    ImageRecord,
    curate_preset,
    dataset_stats,
    filter_min_area,
    remap_classes,
    top_k_families,
    validate_annotation_rules,
)


def counted_dataset(counts, w=0.05, h=0.05, width=1000, height=1000):
    """One image per class with `counts[c]` boxes of that class."""
    cmap = FamilyClassMap(tuple(f"family{c}" for c in sorted(counts)))
    images = []
    for c in sorted(counts):
        boxes = tuple(GroundTruthBox(c, 0.5, 0.5, w, h) for _ in range(counts[c]))
        if boxes:
            images.append(ImageRecord(f"img{c}", width, height, boxes))
    return Dataset(cmap, tuple(images))


def counts_of(dataset):
    return {
        e.class_id: e.count for e in dataset_stats(dataset).entries if e.count
    }


class TestRemapClasses:
    def test_keep_order_defines_new_ids(self):
        ds = counted_dataset({0: 2, 1: 3, 2: 1})
        result = remap_classes(ds, (2, 0))
        assert result.dataset.class_map.names == ("family2", "family0")
        assert counts_of(result.dataset) == {0: 1, 1: 2}
        assert result.dropped_boxes == 3  # family1's boxes
        assert result.dropped_images == 1  # img1 emptied out

    def test_keep_all_in_order_is_identity(self):
        ds = counted_dataset({0: 2, 1: 3})
        result = remap_classes(ds, (0, 1))
        assert result.dataset == ds
        assert result.dropped_boxes == 0
        assert result.dropped_images == 0

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError):
            remap_classes(counted_dataset({0: 1}), ())

    def test_unknown_class_rejected(self):
        with pytest.raises(ValueError):
            remap_classes(counted_dataset({0: 1}), (0, 5))

    def test_duplicate_keep_rejected(self):
        with pytest.raises(ValueError):
            remap_classes(counted_dataset({0: 1, 1: 1}), (0, 0))


class TestTopK:
    def test_keeps_most_abundant(self):
        ds = counted_dataset({0: 4, 1: 2, 2: 1})
        result = top_k_families(ds, 2)
        assert result.dataset.class_map.names == ("family0", "family1")
        assert counts_of(result.dataset) == {0: 4, 1: 2}
        assert result.dropped_boxes == 1

    def test_renumbers_in_descending_count_order(self):
        ds = counted_dataset({0: 1, 1: 4, 2: 2})
        result = top_k_families(ds, 2)
        assert result.dataset.class_map.names == ("family1", "family2")
        assert result.plan.kept_class_ids == (1, 2)
        assert result.plan.id_remap == {1: 0, 2: 1}
        assert counts_of(result.dataset) == {0: 4, 1: 2}

    def test_count_tie_prefers_lower_class_id(self):
        ds = counted_dataset({0: 2, 1: 2, 2: 1})
        result = top_k_families(ds, 1)
        assert result.dataset.class_map.names == ("family0",)

    def test_keeping_every_family_changes_nothing(self):
        ds = counted_dataset({0: 4, 1: 2, 2: 1})
        result = top_k_families(ds, 3)
        assert result.dataset == ds
        assert result.plan.id_remap == {0: 0, 1: 1, 2: 2}
        assert result.dropped_boxes == 0
        assert result.dropped_images == 0

    def test_k_out_of_range_rejected(self):
        ds = counted_dataset({0: 4, 1: 2})
        with pytest.raises(ValueError):
            top_k_families(ds, 0)
        with pytest.raises(ValueError):
            top_k_families(ds, 3)

    def test_k_limited_by_families_with_instances(self):
        # three families in the map, only two have boxes
        ds = counted_dataset({0: 4, 1: 2, 2: 0})
        with pytest.raises(ValueError):
            top_k_families(ds, 3)
        assert top_k_families(ds, 2).dataset.class_map.names == (
            "family0",
            "family1",
        )

    def test_applying_twice_equals_once(self):
        ds = counted_dataset({0: 5, 1: 3, 2: 2, 3: 1})
        once = top_k_families(ds, 2)
        twice = top_k_families(once.dataset, 2)
        assert twice.dataset == once.dataset
        assert twice.dropped_boxes == 0


def sized_box(class_id, w, h):
    return GroundTruthBox(class_id, 0.5, 0.5, w, h)


class TestFilterMinArea:
    def test_threshold_drops_small_keeps_large(self):
        # at 1000x1000: 0.02x0.03 -> 600 px^2, 0.02x0.02 -> 400 px^2
        cmap = FamilyClassMap(("a",))
        image = ImageRecord(
            "img", 1000, 1000, (sized_box(0, 0.02, 0.03), sized_box(0, 0.02, 0.02))
        )
        result = filter_min_area(Dataset(cmap, (image,)), 500.0)
        assert result.dataset.n_boxes == 1
        assert result.dataset.images[0].boxes[0].h == 0.03
        assert result.dropped_boxes == 1

    def test_exact_area_survives(self):
        # 0.03125 * 640 = 20 px and 0.0390625 * 640 = 25 px, exactly 500 px^2
        cmap = FamilyClassMap(("a",))
        image = ImageRecord("img", 640, 640, (sized_box(0, 0.03125, 0.0390625),))
        result = filter_min_area(Dataset(cmap, (image,)), 500.0)
        assert result.dataset.n_boxes == 1
        assert result.dropped_boxes == 0

    def test_zero_threshold_is_identity(self):
        ds = counted_dataset({0: 3, 1: 2})
        result = filter_min_area(ds, 0.0)
        assert result.dataset == ds

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            filter_min_area(counted_dataset({0: 1}), -1.0)

    def test_emptied_images_are_dropped(self):
        cmap = FamilyClassMap(("a",))
        images = (
            ImageRecord("small", 1000, 1000, (sized_box(0, 0.01, 0.01),)),
            ImageRecord("big", 1000, 1000, (sized_box(0, 0.2, 0.2),)),
        )
        result = filter_min_area(Dataset(cmap, images), 500.0)
        assert [i.image_id for i in result.dataset.images] == ["big"]
        assert result.dropped_images == 1

    def test_applying_twice_equals_once(self):
        cmap = FamilyClassMap(("a",))
        boxes = tuple(
            sized_box(0, w, h)
            for w, h in [(0.01, 0.01), (0.05, 0.05), (0.02, 0.03), (0.3, 0.2)]
        )
        ds = Dataset(cmap, (ImageRecord("img", 1000, 1000, boxes),))
        once = filter_min_area(ds, 500.0)
        twice = filter_min_area(once.dataset, 500.0)
        assert twice.dataset == once.dataset
        assert twice.dropped_boxes == 0

    @given(
        st.lists(
            st.tuples(
                st.integers(0, 2),
                st.sampled_from([0.01, 0.02, 0.03, 0.05, 0.1, 0.25]),
                st.sampled_from([0.01, 0.02, 0.03, 0.05, 0.1, 0.25]),
            ),
            min_size=1,
            max_size=30,
        ),
        st.sampled_from([0.0, 400.0, 500.0, 2500.0, 1e6]),
    )
    def test_conservation(self, specs, threshold):
        cmap = FamilyClassMap(("a", "b", "c"))
        boxes = tuple(sized_box(c, w, h) for c, w, h in specs)
        ds = Dataset(cmap, (ImageRecord("img", 1000, 1000, boxes),))
        result = filter_min_area(ds, threshold)
        assert result.dataset.n_boxes + result.dropped_boxes == ds.n_boxes
        assert len(result.dataset.images) + result.dropped_images == len(ds.images)
        # survivors keep their geometry
        for image in result.dataset.images:
            for box in image.boxes:
                assert box.pixel_area(image.width_px, image.height_px) >= threshold


class TestCurationPlan:
    def test_remap_must_be_bijection(self):
        with pytest.raises(ValueError):
            CurationPlan((0, 2), {0: 0, 2: 2})
        with pytest.raises(ValueError):
            CurationPlan((0, 2), {0: 0})

    def test_as_dict_uses_string_keys(self):
        plan = CurationPlan((3, 1), {3: 0, 1: 1}, min_area_px2=500.0)
        d = plan.as_dict()
        assert d["kept_class_ids"] == [3, 1]
        assert d["id_remap"] == {"1": 1, "3": 0}
        assert d["min_area_px2"] == 500.0
        assert d["min_side_px"] is None


def many_class_dataset(n_classes=12, n_images=8):
    """Abundance strictly decreasing with class id; box sizes straddle 500 px^2."""
    cmap = FamilyClassMap(tuple(f"family{c:02d}" for c in range(n_classes)))
    sizes = [(0.05, 0.05), (0.02, 0.02), (0.04, 0.03), (0.02, 0.015)]
    boxes_by_image = defaultdict(list)
    k = 0
    for c in range(n_classes):
        for r in range(2 * (n_classes - c) + 1):
            w, h = sizes[(c + r) % len(sizes)]
            col, row = k % 5, (k // 5) % 5
            boxes_by_image[k % n_images].append(
                GroundTruthBox(c, 0.1 + 0.18 * col, 0.1 + 0.18 * row, w, h)
            )
            k += 1
    images = tuple(
        ImageRecord(f"img{i:03d}", 1280, 720, tuple(boxes_by_image[i]))
        for i in sorted(boxes_by_image)
    )
    return Dataset(cmap, images)


class TestPresets:
    def test_preset_a_keeps_all_classes(self):
        ds = many_class_dataset()
        result = curate_preset(ds, "A")
        assert result.dataset == ds
        assert result.dropped_boxes == 0

    def test_preset_a_still_drops_empty_images(self):
        cmap = FamilyClassMap(("a",))
        images = (
            ImageRecord("has_boxes", 100, 100, (sized_box(0, 0.5, 0.5),)),
            ImageRecord("empty", 100, 100, ()),
        )
        result = curate_preset(Dataset(cmap, images), "A")
        assert [i.image_id for i in result.dataset.images] == ["has_boxes"]
        assert result.dropped_images == 1

    def test_preset_b_is_top_ten(self):
        ds = many_class_dataset()
        assert curate_preset(ds, "B").dataset == top_k_families(ds, 10).dataset
        assert len(curate_preset(ds, "B").dataset.class_map) == 10

    def test_preset_c_chains_top_ten_and_area(self):
        from reefeval import canonicalize_labels

        ds = many_class_dataset()
        via_preset = curate_preset(ds, "C")
        first = top_k_families(ds, 10)
        second = filter_min_area(canonicalize_labels(first.dataset), 500.0)
        assert via_preset.dataset == second.dataset
        assert via_preset.dropped_boxes == first.dropped_boxes + second.dropped_boxes
        assert via_preset.plan.min_area_px2 == 500.0
        assert via_preset.plan.kept_class_ids == first.plan.kept_class_ids

    def test_preset_c_actually_filters_both_ways(self):
        ds = many_class_dataset()
        result = curate_preset(ds, "C")
        assert len(result.dataset.class_map) == 10
        assert 0 < result.dataset.n_boxes < ds.n_boxes

    def test_unknown_preset_rejected(self):
        with pytest.raises(ValueError):
            curate_preset(many_class_dataset(), "D")


class TestValidateAnnotationRules:
    def test_flags_boxes_under_min_side(self):
        # 0.099 x 0.04 at 1000px: longer side just under 100
        cmap = FamilyClassMap(("a",))
        image = ImageRecord("img", 1000, 1000, (sized_box(0, 0.099, 0.04),))
        report = validate_annotation_rules(Dataset(cmap, (image,)))
        assert len(report.violations) == 1
        v = report.violations[0]
        assert v.image_id == "img"
        assert v.box_index == 0
        assert v.longer_side_px == pytest.approx(99.0)

    def test_exactly_at_threshold_passes(self):
        # 0.125 * 800 is exactly 100 px
        cmap = FamilyClassMap(("a",))
        image = ImageRecord("img", 800, 800, (sized_box(0, 0.125, 0.01),))
        report = validate_annotation_rules(Dataset(cmap, (image,)))
        assert report.violations == ()

    def test_longer_side_rescues_thin_boxes(self):
        # 200 x 8 px: tall enough on one side, so it passes
        cmap = FamilyClassMap(("a",))
        image = ImageRecord("img", 1000, 1000, (sized_box(0, 0.2, 0.008),))
        report = validate_annotation_rules(Dataset(cmap, (image,)))
        assert report.violations == ()

    def test_custom_threshold(self):
        cmap = FamilyClassMap(("a",))
        image = ImageRecord("img", 1000, 1000, (sized_box(0, 0.2, 0.1),))
        assert validate_annotation_rules(Dataset(cmap, (image,)), 100.0).violations == ()
        assert (
            len(validate_annotation_rules(Dataset(cmap, (image,)), 300.0).violations)
            == 1
        )

    def test_counts_every_box(self):
        ds = counted_dataset({0: 3, 1: 2})
        report = validate_annotation_rules(ds, 10.0)
        assert report.n_boxes == 5

    def test_as_dict_shape(self):
        cmap = FamilyClassMap(("a",))
        image = ImageRecord("img", 1000, 1000, (sized_box(0, 0.01, 0.01),))
        d = validate_annotation_rules(Dataset(cmap, (image,))).as_dict()
        assert d["n_violations"] == 1
        assert d["violations"][0]["image_id"] == "img"
        assert d["min_side_px"] == 100.0

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            validate_annotation_rules(counted_dataset({0: 1}), -5.0)
