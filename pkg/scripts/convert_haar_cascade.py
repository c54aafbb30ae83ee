#!/usr/bin/env python3
"""Convert an old-format OpenCV Haar cascade XML (type_id
"opencv-haar-classifier") into the new-style interchange format
(<cascade> with stageType BOOST / featureType HAAR).

The trained model is unchanged: stage thresholds, stump thresholds, leaf
values, and feature rectangles are copied verbatim; only the serialization
is restructured. Only stump cascades (one node per tree) are supported,
which covers the classic bundled detectors. The original license comment
block is carried over into the output file.

Usage: convert_haar_cascade.py OLD.xml NEW.xml
"""

import re
import sys
import xml.etree.ElementTree as ET


def _floats(text):
    return [float(tok) for tok in text.split()]


def convert(old_xml_text: str) -> str:
    root = ET.fromstring(old_xml_text)
    cascade_el = None
    for child in root:
        if child.get("type_id") == "opencv-haar-classifier":
            cascade_el = child
            break
    if cascade_el is None:
        raise ValueError("input is not an old-format opencv-haar-classifier file")

    win_w, win_h = (int(v) for v in cascade_el.findtext("size").split())

    features = []        # list of (rects, tilted) in weak-classifier order
    stages_out = []      # list of (stage_threshold, [(feat_idx, thr, lv, rv)])
    for stage_el in cascade_el.find("stages"):
        weaks = []
        for tree_el in stage_el.find("trees"):
            nodes = tree_el.findall("_")
            if len(nodes) != 1:
                raise ValueError("only stump cascades (1 node per tree) supported")
            node = nodes[0]
            if node.findtext("left_val") is None or node.findtext("right_val") is None:
                raise ValueError("tree node has child nodes; not a stump cascade")
            feat_el = node.find("feature")
            rects = [r.text.strip() for r in feat_el.find("rects")]
            tilted = int(feat_el.findtext("tilted"))
            feat_idx = len(features)
            features.append((rects, tilted))
            weaks.append((feat_idx,
                          node.findtext("threshold").strip(),
                          node.findtext("left_val").strip(),
                          node.findtext("right_val").strip()))
        stages_out.append((stage_el.findtext("stage_threshold").strip(), weaks))

    # Preserve the license/provenance comment block from the source file.
    m = re.search(r"<!--(.*?)-->", old_xml_text, flags=re.DOTALL)
    comment = m.group(0) + "\n" if m else ""

    out = ['<?xml version="1.0"?>\n', comment]
    out.append('<opencv_storage>\n')
    out.append('<cascade type_id="opencv-cascade-classifier">\n')
    out.append('  <stageType>BOOST</stageType>\n')
    out.append('  <featureType>HAAR</featureType>\n')
    out.append(f'  <height>{win_h}</height>\n')
    out.append(f'  <width>{win_w}</width>\n')
    max_weak = max(len(w) for _, w in stages_out)
    out.append('  <stageParams>\n')
    out.append(f'    <maxWeakCount>{max_weak}</maxWeakCount></stageParams>\n')
    out.append('  <featureParams>\n')
    out.append('    <maxCatCount>0</maxCatCount></featureParams>\n')
    out.append(f'  <stageNum>{len(stages_out)}</stageNum>\n')
    out.append('  <stages>\n')
    for st_thr, weaks in stages_out:
        out.append('    <_>\n')
        out.append(f'      <maxWeakCount>{len(weaks)}</maxWeakCount>\n')
        out.append(f'      <stageThreshold>{st_thr}</stageThreshold>\n')
        out.append('      <weakClassifiers>\n')
        for feat_idx, thr, lv, rv in weaks:
            out.append('        <_>\n')
            out.append('          <internalNodes>\n')
            out.append(f'            0 -1 {feat_idx} {thr}</internalNodes>\n')
            out.append('          <leafValues>\n')
            out.append(f'            {lv} {rv}</leafValues></_>\n')
        out.append('      </weakClassifiers></_>\n')
    out.append('  </stages>\n')
    out.append('  <features>\n')
    for rects, tilted in features:
        out.append('    <_>\n')
        out.append('      <rects>\n')
        for r in rects:
            out.append('        <_>\n')
            out.append(f'          {r}</_>\n')
        out.append('      </rects>\n')
        out.append(f'      <tilted>{tilted}</tilted></_>\n')
    out.append('  </features></cascade>\n')
    out.append('</opencv_storage>\n')
    return "".join(out)


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    with open(argv[1], encoding="utf-8") as f:
        old = f.read()
    new = convert(old)
    with open(argv[2], "w", encoding="utf-8") as f:
        f.write(new)
    print(f"wrote {argv[2]}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
