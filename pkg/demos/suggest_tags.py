"""Tag suggestion pipelines over the bundled offline knowledge context.

Shows the three suggestion sources (text entity recognition, gazetteer
region lookup, tag history) plus related-concept expansion, and how the
merge step deduplicates, ranks, and caps what a user would see.
"""

from maptag import (
    GeoBBox,
    KnowledgeResource,
    ResourceRef,
    TagGraph,
    UserRef,
    expand_related,
    load_knowledge_context,
    merge_suggestions,
    suggest_from_history,
    suggest_from_region,
    suggest_from_text,
)
from maptag.providers import GIBRALTAR_SAMPLE_TEXT

context = load_knowledge_context()

print("comment text:")
print(f"  {GIBRALTAR_SAMPLE_TEXT}\n")

text_hits = suggest_from_text(GIBRALTAR_SAMPLE_TEXT, context, limit=10)
print("entity-recognition suggestions (label shown to users, URI kept internal):")
for s in text_hits:
    print(f"  {s.score:.2f}  {s.label:<22} {s.uri}")

strait = GeoBBox(min_lon=-6.0, min_lat=35.5, max_lon=-5.0, max_lat=36.5)
region_hits = suggest_from_region(strait, context, limit=10)
print("\ngazetteer suggestions inside the drawn region:")
for s in region_hits:
    print(f"  {s.label:<22} geo={s.geo}")

# History suggestions sample from tags users previously applied.
graph = TagGraph()
target = "http://maps.example/annotations/demo"
graph.add_resource(ResourceRef(uri=target, kind="annotation"))
user = UserRef(id="demo-user")
for name in ("Paris", "Berlin", "Ithaca"):
    graph.record_relationship(user, KnowledgeResource(uri=f"http://en.wikipedia.org/wiki/{name}", label=name), target, "accepted")
graph.record_relationship(user, "family trip", target, "accepted")

history_hits = suggest_from_history(graph, rng_seed=7, limit=3)
print("\nhistory suggestions (seeded sample of previously applied tags):")
for s in history_hits:
    print(f"  {s.label:<22} concept={'yes' if s.uri else 'label only'}")

related = expand_related("http://en.wikipedia.org/wiki/Paris", context, limit=5)
print("\nconcepts linked to Paris in the knowledge context:")
for s in related:
    print(f"  {s.label}")

merged = merge_suggestions([text_hits, region_hits, history_hits, related], cap=15)
print(f"\nmerged display list ({len(merged)} chips, capped at 15, deduplicated):")
for s in merged:
    print(f"  {s.score:.2f}  [{s.origin:<7}] {s.label}")
