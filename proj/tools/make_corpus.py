#!/usr/bin/env python3
"""Builds the synthetic evaluation corpora in fixtures/corpus from the
pipeline fixtures: one unperturbed copy of every pipeline and one with a
deterministic perturbation (missing node, missing edge, stray node, or a
missing edge plus a missing node).

usage: tools/make_corpus.py path/to/pipeforge
"""
import copy
import json
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
TAGS = {
    "news_summary": "language", "sheet_slogan": "language", "web_qa": "language", "web_search_page": "language",
    "sunglasses": "multimodal", "people_highlight": "visual", "portrait_3d": "visual", "depth_map_view": "visual",
    "image_question": "multimodal", "describe_photo": "multimodal", "ocr_summary": "multimodal", "poster_mix": "multimodal",
}


def compile_pipeline(binary, name):
    out = subprocess.run([binary, "compile", str(ROOT / "fixtures" / "pipelines" / f"{name}.ipc")],
                         check=True, capture_output=True, text=True)
    return json.loads(out.stdout)


INSTRUCTIONS = {
    "news_summary": "Get the latest news about New York using Google Search and compile a high-level summary of one of the results.",
    "sheet_slogan": "Write a slogan for a product listed in my spreadsheet.",
    "web_qa": "Answer a question about dataflow programming using its Wikipedia page.",
    "web_search_page": "Search the web for hiking trails near Zurich and show the first page.",
    "sunglasses": "Create a virtual sunglasses try-on experience using your web camera.",
    "people_highlight": "Highlight people in my webcam video.",
    "portrait_3d": "Turn my portrait into a 3D photo.",
    "depth_map_view": "Show a depth map of a resized photo.",
    "image_question": "Caption an image in detail.",
    "describe_photo": "Tell me what is unusual about this photo.",
    "ocr_summary": "Summarize the text in a scanned document.",
    "poster_mix": "Blend my camera feed with a generated travel poster.",
}


def drop_node(graph, node_id):
    graph["nodes"] = [n for n in graph["nodes"] if n["id"] != node_id]
    for n in graph["nodes"]:
        for socket in list(n["incomingEdges"]):
            n["incomingEdges"][socket] = [e for e in n["incomingEdges"][socket] if e["sourceNodeId"] != node_id]
            if not n["incomingEdges"][socket]:
                del n["incomingEdges"][socket]


def drop_edge(graph):
    for n in reversed(graph["nodes"]):
        for socket in sorted(n["incomingEdges"]):
            del n["incomingEdges"][socket]
            return


def perturb(graph, kind):
    g = copy.deepcopy(graph)
    if kind == 0:
        drop_node(g, g["nodes"][-1]["id"])
    elif kind == 1:
        drop_edge(g)
    elif kind == 2:
        g["nodes"].append({"id": "image_processor_9", "nodeSpecId": "image_processor", "incomingEdges": {},
                           "params": {"operation": "resize"}, "position": {"x": 0, "y": 0}})
    else:
        drop_edge(g)
        drop_node(g, g["nodes"][-1]["id"])
    return g


def main():
    binary = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build" / "tools" / "pipeforge")
    clean, perturbed = [], []
    for i, name in enumerate(sorted(TAGS)):
        graph = compile_pipeline(binary, name)
        entry = {"instruction": INSTRUCTIONS[name], "tag": TAGS[name], "target": graph}
        clean.append(dict(entry, generated=graph))
        perturbed.append(dict(entry, generated=perturb(graph, i % 4)))
    out = ROOT / "fixtures" / "corpus"
    out.mkdir(parents=True, exist_ok=True)
    for file, data in (("unperturbed.json", clean), ("perturbed.json", perturbed)):
        (out / file).write_text(json.dumps(data, indent=2) + "\n")


if __name__ == "__main__":
    main()
