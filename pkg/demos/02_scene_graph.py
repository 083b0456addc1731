"""Building a scene graph from detector, OCR, and face annotations.

Objects and faces form the parent layer. Each OCR text attaches to every
parent covering at least 70% of the text's own box; a parent keeps its five
largest children, ranked by box area, so prominent print (brand names,
prices) wins over fine print.
"""

from deictic import (
    associate,
    bundled_fixture_path,
    expand_plural_region,
    load_scene_fixture,
    nearest_texts,
    overlap_ratio,
)

scene = load_scene_fixture(bundled_fixture_path("mango"))
print(f"frame {scene.frame.width}x{scene.frame.height}, "
      f"{len(scene.entities)} parents, {len(scene.texts)} texts")

graph = associate(scene.entities, scene.texts, scene.frame)
for parent in graph.parents:
    children = " ".join(t.text for t in parent.children) or "(no children)"
    print(f"  {parent.entity.label:<8} <- {children}")
print(f"  orphans: {[t.text for t in graph.orphan_texts]}")

print("\n== the 70% rule, by the numbers ==")
bottle = next(p for p in graph.parents if p.entity.label == "Bottle")
for text in scene.texts:
    ratio = overlap_ratio(text.bbox, bottle.entity.bbox)
    print(f"  {text.text:<10} overlap {ratio:.2f} area {text.bbox.area:>7.0f}")

print("\n== nearest texts around a gaze point ==")
for origin in [(975, 575), (760, 340)]:
    ranked = nearest_texts(origin, list(scene.texts), k=3)
    print(f"  gaze {origin}: {[t.text for t in ranked]}")

print("\n== plural expansion ==")
# A point input grows into a half-frame box so several parents can qualify.
region = expand_plural_region((960, 540), scene.frame)
print(f"  center gaze expands to {region.as_list()} "
      f"({region.width:.0f}x{region.height:.0f} of {scene.frame.width}x{scene.frame.height})")
corner = expand_plural_region((0, 0), scene.frame)
print(f"  corner gaze clamps to {corner.as_list()}")
