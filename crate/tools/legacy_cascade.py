#!/usr/bin/env python3
"""Rewrite an OpenCV >= 2.4 Haar cascade (<cascade> with shared <features>)
into the legacy stump layout (<size>, <stages>/<trees>/<_>/<_> with inline
<feature>, <threshold>, <left_val>, <right_val>, <stage_threshold>).

Numeric literals are copied verbatim. Usage:
    legacy_cascade.py INPUT.xml OUTPUT.xml NAME
"""
import sys
import xml.etree.ElementTree as ET


def main():
    src, dst, name = sys.argv[1:4]
    root = ET.parse(src).getroot()
    casc = root.find("cascade")
    if casc.findtext("featureType").strip() != "HAAR":
        sys.exit("not a Haar cascade")
    w = casc.findtext("width").strip()
    h = casc.findtext("height").strip()
    feats = []
    for f in casc.find("features"):
        rects = [r.text.strip() for r in f.find("rects")]
        tilted = (f.findtext("tilted") or "0").strip()
        feats.append((rects, tilted))

    out = []
    out.append('<?xml version="1.0"?>')
    out.append("<opencv_storage>")
    out.append(f'<{name} type_id="opencv-haar-classifier">')
    out.append(f"  <size>{w} {h}</size>")
    out.append("  <stages>")
    for si, st in enumerate(casc.find("stages")):
        out.append("    <_>")
        out.append(f"      <!-- stage {si} -->")
        out.append("      <trees>")
        for wc in st.find("weakClassifiers"):
            nodes = wc.findtext("internalNodes").split()
            leaves = wc.findtext("leafValues").split()
            if len(nodes) != 4:
                sys.exit("non-stump weak classifier")
            left, right, fidx, thr = nodes
            if left != "0" or right != "-1":
                sys.exit("unexpected node layout")
            rects, tilted = feats[int(fidx)]
            out.append("        <_>")
            out.append("          <_>")
            out.append("            <feature>")
            out.append("              <rects>")
            for r in rects:
                out.append(f"                <_>{r}</_>")
            out.append("              </rects>")
            out.append(f"              <tilted>{tilted}</tilted></feature>")
            out.append(f"            <threshold>{thr}</threshold>")
            out.append(f"            <left_val>{leaves[0]}</left_val>")
            out.append(f"            <right_val>{leaves[1]}</right_val></_></_>")
        out.append("      </trees>")
        out.append(f"      <stage_threshold>{st.findtext('stageThreshold').strip()}</stage_threshold>")
        out.append(f"      <parent>{si - 1}</parent>")
        out.append("      <next>-1</next></_>")
    out.append("  </stages>")
    out.append(f"</{name}>")
    out.append("</opencv_storage>")
    with open(dst, "w") as fh:
        fh.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
