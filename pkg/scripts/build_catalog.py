#!/usr/bin/env python3
"""Writes the task catalog: one JSON document per task under
src/trajbench/tasks/. Edit the definitions here and re-run."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "trajbench" / "tasks"


def obj(name, shape, dims, pose, graspable=False, movable=True,
        parts=None, cavities=None, anchor=None):
    d = {
        "name": name, "shape": shape, "dimensions": list(dims),
        "pose": list(pose), "graspable": graspable, "movable": movable,
    }
    if parts:
        d["parts"] = parts
    if cavities:
        d["cavities"] = cavities
    if anchor:
        d["anchor"] = anchor
    return d


def part(offset, dims, yaw=0.0):
    return {"offset": list(offset), "dimensions": list(dims), "yaw": yaw}


def cavity(offset, dims, floor):
    return {"offset": list(offset), "dimensions": list(dims), "floor": floor}


def chip_bag(name, x, y=0.45):
    return obj(name, "box", (0.08, 0.12, 0.05), (x, y, 0.025, 0.0), graspable=True)


def can(name="can", x=0.0, y=0.45):
    return obj(name, "cylinder", (0.033, 0.12), (x, y, 0.06, 0.0), graspable=True)


def fruit(name, x, y=0.45, r=0.03, h=0.07):
    return obj(name, "cylinder", (r, h), (x, y, h / 2, 0.0), graspable=True)


def bowl(name="bowl", x=0.10, y=0.40):
    return obj(
        name, "cylinder", (0.075, 0.06), (x, y, 0.03, 0.0), graspable=True,
        parts={"rim": part((0.065, 0.0, 0.015), (0.01, 0.03, 0.03))},
        cavities=[cavity((0.0, 0.0), (0.10, 0.10), 0.01)],
    )


def sponge(x=-0.2, y=0.35):
    return obj("sponge", "box", (0.07, 0.11, 0.03), (x, y, 0.015, 0.0), graspable=True)


def plate(x=0.1, y=0.5):
    return obj("plate", "cylinder", (0.09, 0.02), (x, y, 0.01, 0.0), movable=False)


def band(xlo, xhi, ylo=0.35, yhi=0.55, yaw=0.0):
    r = {"x": [xlo, xhi], "y": [ylo, yhi]}
    if yaw:
        r["yaw"] = [-yaw, yaw]
    return r


TASKS = [
    {
        "id": "pick_chip_bag_left",
        "instruction": "pick the chip bag on the left of the table",
        "objects": [chip_bag("left chip bag", -0.22), chip_bag("right chip bag", 0.22)],
        "randomization": {
            "left chip bag": band(-0.30, -0.14, yaw=0.4),
            "right chip bag": band(0.14, 0.30, yaw=0.4),
        },
        "checker": {"id": "lift", "params": {"target": "left chip bag", "height": 0.10}},
        "criterion": "the left chip bag ends at least 0.10 m above its starting height",
    },
    {
        "id": "pick_rightmost_can",
        "instruction": "pick the rightmost can",
        "objects": [can("leftmost can", -0.26), can("middle can", 0.0),
                    can("rightmost can", 0.26)],
        "randomization": {
            "leftmost can": band(-0.32, -0.20), "middle can": band(-0.06, 0.06),
            "rightmost can": band(0.20, 0.32),
        },
        "checker": {"id": "lift", "params": {"target": "rightmost can", "height": 0.10}},
        "criterion": "the rightmost can ends at least 0.10 m above its starting height",
    },
    {
        "id": "pick_middle_fruit",
        "instruction": "pick the fruit in the middle",
        "objects": [fruit("left fruit", -0.24), fruit("middle fruit", 0.0),
                    fruit("right fruit", 0.24)],
        "randomization": {
            "left fruit": band(-0.30, -0.18), "middle fruit": band(-0.05, 0.05),
            "right fruit": band(0.18, 0.30),
        },
        "checker": {"id": "lift", "params": {"target": "middle fruit", "height": 0.10}},
        "criterion": "the horizontally middle fruit ends at least 0.10 m above its starting height",
    },
    {
        "id": "pick_chip_bag_right_of_can",
        "instruction": "pick the chip bag which is to the right of the can",
        "objects": [can("can", 0.0), chip_bag("left chip bag", -0.24),
                    chip_bag("right chip bag", 0.24)],
        "randomization": {
            "can": band(-0.05, 0.05),
            "left chip bag": band(-0.32, -0.16, yaw=0.4),
            "right chip bag": band(0.16, 0.32, yaw=0.4),
        },
        "checker": {"id": "lift", "params": {"target": "right chip bag", "height": 0.10}},
        "criterion": "the chip bag right of the can ends at least 0.10 m above its starting height",
    },
    {
        "id": "knock_over_left_bottle",
        "instruction": "knock over the left bottle",
        "objects": [
            obj("left bottle", "cylinder", (0.03, 0.20), (-0.2, 0.45, 0.10, 0.0), graspable=True),
            obj("right bottle", "cylinder", (0.03, 0.20), (0.2, 0.45, 0.10, 0.0), graspable=True),
        ],
        "randomization": {
            "left bottle": band(-0.30, -0.12), "right bottle": band(0.12, 0.30),
        },
        "checker": {"id": "push_any", "params": {"target": "left bottle",
                                                 "distance": 0.10, "surface_band": 0.005}},
        "criterion": "the left bottle is displaced at least 0.10 m while staying at table level",
        "proxy_notes": "toppling is not representable in a yaw-only kinematic world; "
                       "proxied as a tabletop push of at least 0.10 m with the bottle "
                       "in table contact throughout.",
    },
    {
        "id": "move_right_fruit_to_bottle",
        "instruction": "move the fruit which is on the right towards the bottle",
        "objects": [
            fruit("left fruit", -0.24, r=0.02, h=0.05),
            fruit("right fruit", 0.24, r=0.02, h=0.05),
            obj("bottle", "cylinder", (0.025, 0.16), (0.0, 0.58, 0.08, 0.0), graspable=True),
        ],
        "randomization": {
            "left fruit": band(-0.30, -0.18), "right fruit": band(0.18, 0.30),
            "bottle": band(-0.06, 0.06, 0.52, 0.62),
        },
        "checker": {"id": "proximity", "params": {"target": "right fruit",
                                                  "reference": "bottle", "distance": 0.05}},
        "criterion": "the right fruit's final center lies within 0.05 m of the bottle's center (XY)",
    },
    {
        "id": "move_banana_near_pear",
        "instruction": "move the banana near the pear",
        "objects": [
            obj("banana", "box", (0.04, 0.18, 0.04), (-0.2, 0.45, 0.02, 0.0), graspable=True),
            fruit("pear", 0.2, r=0.028, h=0.08),
        ],
        "randomization": {
            "banana": band(-0.28, -0.14, yaw=0.6), "pear": band(0.14, 0.28),
        },
        "checker": {"id": "proximity", "params": {"target": "banana",
                                                  "reference": "pear", "distance": 0.05}},
        "criterion": "the banana's final center lies within 0.05 m of the pear's center (XY)",
    },
    {
        "id": "push_left_bottle_to_orange",
        "instruction": "push the bottle on the left side to the orange",
        "objects": [
            obj("left bottle", "cylinder", (0.022, 0.16), (-0.22, 0.45, 0.08, 0.0), graspable=True),
            obj("right bottle", "cylinder", (0.022, 0.16), (0.26, 0.45, 0.08, 0.0), graspable=True),
            fruit("orange", 0.0, y=0.45, r=0.025, h=0.05),
        ],
        "randomization": {
            "left bottle": band(-0.28, -0.18), "right bottle": band(0.22, 0.32),
            "orange": band(-0.04, 0.04),
        },
        "checker": {"id": "push_to", "params": {"target": "left bottle", "reference": "orange",
                                                "distance": 0.05, "surface_band": 0.005}},
        "criterion": "the left bottle stays in table contact throughout and ends within "
                     "0.05 m of the orange's center (XY)",
    },
    {
        "id": "move_can_to_bottom",
        "instruction": "move the can to the bottom of the table",
        "objects": [can("can", 0.0, 0.5)],
        "randomization": {"can": band(-0.15, 0.15, 0.45, 0.6)},
        "checker": {"id": "near_edge", "params": {"target": "can", "distance": 0.10}},
        "criterion": "the can's final center is within 0.10 m of the near (small-y) workspace edge",
    },
    {
        "id": "move_lonely_object",
        "instruction": "move the lonely object to the others",
        "objects": [
            obj("red cube", "box", (0.05, 0.05, 0.05), (0.18, 0.50, 0.025, 0.0), graspable=True),
            obj("green cube", "box", (0.05, 0.05, 0.05), (0.30, 0.50, 0.025, 0.0), graspable=True),
            obj("blue cube", "box", (0.05, 0.05, 0.05), (0.24, 0.60, 0.025, 0.0), graspable=True),
            obj("yellow cube", "box", (0.05, 0.05, 0.05), (-0.28, 0.20, 0.025, 0.0), graspable=True),
        ],
        "randomization": {
            "red cube": band(0.14, 0.22, 0.46, 0.54),
            "green cube": band(0.28, 0.34, 0.46, 0.54),
            "blue cube": band(0.20, 0.28, 0.58, 0.66),
            "yellow cube": band(-0.32, -0.24, 0.15, 0.25),
        },
        "checker": {"id": "lonely_join", "params": {"distance": 0.05}},
        "criterion": "the initially most isolated item ends within 0.05 m of another item's center",
    },
    {
        "id": "push_can_right",
        "instruction": "push the can towards the right",
        "objects": [can("can", -0.1)],
        "randomization": {"can": band(-0.2, 0.0)},
        "checker": {"id": "push_direction", "params": {"target": "can", "axis": "x",
                                                       "sign": 1, "distance": 0.10,
                                                       "surface_band": 0.005}},
        "criterion": "the can moves at least 0.10 m in +x while staying in table contact throughout",
    },
    {
        "id": "sponge_clean_can",
        "instruction": "use the sponge to clean the can",
        "objects": [sponge(-0.2, 0.4), can("can", 0.15, 0.45)],
        "randomization": {"sponge": band(-0.28, -0.12), "can": band(0.10, 0.25)},
        "checker": {"id": "touch", "params": {"target": "sponge", "reference": "can"}},
        "criterion": "the sponge makes contact with the can at some tick",
    },
    {
        "id": "place_apple_in_bowl",
        "instruction": "place the apple in the bowl",
        "objects": [fruit("apple", 0.25, 0.55, r=0.035, h=0.07), bowl("bowl", -0.12, 0.40)],
        "randomization": {"apple": band(0.18, 0.32, 0.5, 0.62),
                          "bowl": band(-0.2, -0.05, 0.35, 0.45)},
        "checker": {"id": "containment", "params": {"target": "apple", "container": "bowl"}},
        "criterion": "the apple's final center is inside the bowl footprint and below the bowl's top",
    },
    {
        "id": "pick_apple_from_bowl",
        "instruction": "pick the apple from the bowl and place it on the table",
        "objects": [bowl("bowl", -0.12, 0.40),
                    obj("apple", "cylinder", (0.035, 0.07), (0.0, 0.0, 0.045, 0.0),
                        graspable=True, anchor="bowl")],
        "randomization": {"bowl": band(-0.2, -0.05, 0.35, 0.45)},
        "checker": {"id": "removed_to_table", "params": {"target": "apple", "container": "bowl"}},
        "criterion": "the apple ends resting on the table with its center outside the bowl footprint",
    },
    {
        "id": "wipe_plate_with_sponge",
        "instruction": "wipe the plate with the sponge",
        "objects": [sponge(-0.22, 0.35), plate(0.1, 0.5)],
        "randomization": {"sponge": band(-0.3, -0.14, 0.3, 0.4)},
        "checker": {"id": "wipe_on", "params": {"tool": "sponge", "surface": "plate",
                                                "min_path": 0.15, "min_turn": 3.141592653589793,
                                                "band": 0.01}},
        "criterion": "the sponge travels at least 0.15 m over the plate within 0.01 m of its "
                     "top, with cumulative heading change of at least pi",
        "proxy_notes": "a wiping motion is operationalized as contact-band path length plus "
                       "cumulative heading change; the plate is fixed to the table.",
    },
    {
        "id": "shake_mustard_bottle",
        "instruction": "shake the mustard bottle",
        "objects": [obj("mustard bottle", "cylinder", (0.03, 0.16),
                        (0.0, 0.45, 0.08, 0.0), graspable=True)],
        "randomization": {"mustard bottle": band(-0.15, 0.15, 0.38, 0.55)},
        "checker": {"id": "shake", "params": {"target": "mustard bottle",
                                              "amplitude": 0.03, "reversals": 2}},
        "criterion": "the mustard bottle oscillates (z or x) with at least 2 direction "
                     "reversals of amplitude at least 0.03 m",
    },
    {
        "id": "stir_mug_with_spoon",
        "instruction": "stir the mug with the spoon",
        "objects": [
            obj("spoon", "box", (0.03, 0.03, 0.15), (-0.22, 0.45, 0.075, 0.0), graspable=True),
            obj("mug", "cylinder", (0.04, 0.09), (0.12, 0.45, 0.045, 0.0), graspable=True,
                parts={"handle": part((0.055, 0.0, 0.0), (0.03, 0.02, 0.05))},
                cavities=[cavity((0.0, 0.0), (0.055, 0.055), 0.01)]),
        ],
        "randomization": {"spoon": band(-0.3, -0.15), "mug": band(0.08, 0.2)},
        "checker": {"id": "stir", "params": {"tool": "spoon", "vessel": "mug",
                                             "min_turn": 4.71, "min_path": 0.04}},
        "criterion": "the spoon dips below the mug's top inside its footprint and sweeps a "
                     "path of at least 0.04 m with at least 1.5 turns' worth of heading change",
        "proxy_notes": "the upright starting pose is part of the scene; stirring is "
                       "operationalized on the in-mug path geometry.",
    },
    {
        "id": "draw_star",
        "instruction": "draw a five-pointed star 10cm wide on the table with a pen",
        "objects": [obj("pen", "box", (0.015, 0.015, 0.14), (0.2, 0.5, 0.07, 0.0),
                        graspable=True)],
        "randomization": {"pen": band(0.12, 0.28, 0.4, 0.6)},
        "checker": {"id": "star", "params": {"tool": "pen", "width": 0.10,
                                             "tolerance": 0.015, "contact_band": 0.01}},
        "criterion": "while the pen tip is within 0.01 m of the table, its path passes within "
                     "0.015 m of all 5 outer vertices of a 0.10 m wide five-pointed star "
                     "(best fit over rotation)",
    },
    {
        "id": "drop_ball_into_cup",
        "instruction": "drop the ball into the cup",
        "objects": [
            obj("ball", "cylinder", (0.02, 0.04), (-0.2, 0.5, 0.02, 0.0), graspable=True),
            obj("cup", "cylinder", (0.04, 0.10), (0.15, 0.45, 0.05, 0.0), graspable=True,
                cavities=[cavity((0.0, 0.0), (0.05, 0.05), 0.01)]),
        ],
        "randomization": {"ball": band(-0.28, -0.12, 0.42, 0.58), "cup": band(0.1, 0.22)},
        "checker": {"id": "containment", "params": {"target": "ball", "container": "cup"}},
        "criterion": "the ball's final center is inside the cup footprint and below the cup's top",
    },
    {
        "id": "align_bottle_vertically",
        "instruction": "align the bottle vertically",
        "objects": [obj("bottle", "box", (0.06, 0.22, 0.06), (0.0, 0.45, 0.03, 1.2),
                        graspable=True)],
        "randomization": {"bottle": {"x": [-0.15, 0.15], "y": [0.38, 0.55],
                                     "yaw": [0.6, 2.5]}},
        "checker": {"id": "align_axis", "params": {"target": "bottle", "tolerance": 0.26}},
        "criterion": "the lying bottle's long axis ends within 15 degrees of the y axis "
                     "(pointing at the top or bottom table edge)",
        "proxy_notes": "the lying bottle is a box proxy; re-orientation happens by grasping "
                       "and rotating, not rolling.",
    },
    {
        "id": "open_bottle_cap",
        "instruction": "open the bottle cap",
        "objects": [
            obj("bottle", "cylinder", (0.03, 0.12), (0.0, 0.45, 0.06, 0.0), movable=False),
            obj("bottle cap", "cylinder", (0.015, 0.03), (0.0, 0.0, 0.135, 0.0),
                graspable=True, anchor="bottle"),
        ],
        "randomization": {"bottle": band(-0.15, 0.15, 0.38, 0.55)},
        "checker": {"id": "rotate_lifted", "params": {"target": "bottle cap",
                                                      "min_rotation": 1.5707963267948966,
                                                      "max_lift": 0.01}},
        "criterion": "the cap rotates at least 90 degrees about z while rising no more than "
                     "0.01 m; lifting afterwards is allowed",
        "proxy_notes": "the cap is a small graspable cylinder resting on the bottle; "
                       "unscrewing is proxied as yaw rotation before any lift.",
    },
    {
        "id": "insert_bread_into_toaster",
        "instruction": "insert the bread into the toaster",
        "objects": [
            obj("bread", "box", (0.025, 0.11, 0.11), (-0.22, 0.40, 0.055, 0.0), graspable=True),
            obj("toaster", "box", (0.16, 0.26, 0.15), (0.15, 0.5, 0.075, 0.0), movable=False,
                parts={"left slot": part((-0.035, 0.0, 0.055), (0.045, 0.16, 0.04)),
                       "right slot": part((0.035, 0.0, 0.055), (0.045, 0.16, 0.04))},
                cavities=[cavity((-0.035, 0.0), (0.045, 0.16), 0.03),
                          cavity((0.035, 0.0), (0.045, 0.16), 0.03)]),
        ],
        "randomization": {"bread": band(-0.3, -0.14, 0.35, 0.45, yaw=0.3)},
        "checker": {"id": "containment", "params": {"target": "bread", "container": "toaster"}},
        "criterion": "the bread's final center is inside the toaster footprint and below its top",
        "proxy_notes": "the toaster is a rigid box with two open slots; no lever or spring.",
    },
    {
        "id": "pick_up_bowl",
        "instruction": "pick up the bowl",
        "objects": [bowl("bowl", 0.10, 0.40)],
        "randomization": {"bowl": band(0.0, 0.2, 0.35, 0.5)},
        "checker": {"id": "lift", "params": {"target": "bowl", "height": 0.10}},
        "criterion": "the bowl ends at least 0.10 m above its starting height",
    },
    {
        "id": "move_pan_left",
        "instruction": "move the pan to the left",
        "objects": [obj("pan", "cylinder", (0.10, 0.04), (0.15, 0.5, 0.02, 0.0), graspable=True,
                        parts={"handle": part((0.14, 0.0, 0.0), (0.08, 0.025, 0.025))})],
        "randomization": {"pan": {"x": [0.05, 0.25], "y": [0.42, 0.58],
                                  "yaw": [-0.6, 0.6]}},
        "checker": {"id": "move_direction", "params": {"target": "pan", "axis": "x",
                                                       "sign": -1, "distance": 0.10}},
        "criterion": "the pan's center moves at least 0.10 m in -x (the robot's left)",
    },
    {
        "id": "wipe_table_avoid_plate",
        "instruction": "wipe the table with the sponge, while avoiding the plate on the table",
        "objects": [sponge(-0.22, 0.35), plate(0.12, 0.5)],
        "randomization": {"sponge": band(-0.3, -0.14, 0.3, 0.4)},
        "checker": {"id": "wipe_avoid", "params": {"tool": "sponge", "avoid": "plate",
                                                   "min_path": 0.15,
                                                   "min_turn": 3.141592653589793,
                                                   "band": 0.01}},
        "criterion": "the sponge wipes at least 0.15 m at table level with cumulative heading "
                     "change of at least pi, and never touches the plate",
    },
    {
        "id": "draw_circle",
        "instruction": "draw a circle 10cm wide with its centre at [0.0,0.3,0.0] "
                       "with the gripper closed",
        "objects": [],
        "randomization": {},
        "checker": {"id": "circle", "params": {"center": [0.0, 0.3], "radius": 0.05,
                                               "residual": 0.015, "max_z": 0.01,
                                               "min_sweep": 5.65}},
        "criterion": "with the gripper closed at z <= 0.01, the path stays within 0.015 m of "
                     "the radius-0.05 circle centered at (0.0, 0.3) and sweeps at least 1.8 pi",
    },
    {
        "id": "unplug_charger",
        "instruction": "unplug the charger",
        "objects": [
            obj("plug socket", "box", (0.12, 0.26, 0.06), (0.1, 0.5, 0.03, 0.0), movable=False,
                cavities=[cavity((0.0, -0.08), (0.05, 0.06), 0.005)]),
            obj("charger", "box", (0.04, 0.05, 0.07), (0.0, -0.08, 0.04, 0.0),
                graspable=True, anchor="plug socket"),
        ],
        "randomization": {"plug socket": band(0.0, 0.2, 0.42, 0.58)},
        "checker": {"id": "removed_from", "params": {"target": "charger",
                                                     "container": "plug socket"}},
        "criterion": "the charger ends fully clear of the socket: footprints disjoint or its "
                     "bottom above the socket's top",
        "proxy_notes": "the socket is a rigid box with a snug recess; no plug retention force.",
    },
    {
        "id": "tissue_from_dispenser",
        "instruction": "take out tissue from the dispenser",
        "objects": [
            obj("dispenser", "box", (0.13, 0.24, 0.12), (0.1, 0.5, 0.06, 0.0), movable=False,
                cavities=[cavity((0.0, 0.0), (0.04, 0.10), 0.01)]),
            obj("tissue", "box", (0.02, 0.08, 0.10), (0.0, 0.0, 0.09, 0.0),
                graspable=True, anchor="dispenser"),
        ],
        "randomization": {"dispenser": band(0.0, 0.2, 0.42, 0.58)},
        "checker": {"id": "removed_from", "params": {"target": "tissue",
                                                     "container": "dispenser"}},
        "criterion": "the tissue ends fully clear of the dispenser: footprints disjoint or its "
                     "bottom above the dispenser's top",
        "proxy_notes": "the tissue is a rigid sheet protruding from the top opening; no "
                       "tearing or feeding of the next sheet.",
    },
    {
        "id": "lower_lamp_brightness",
        "instruction": "lower the brightness of the lamp",
        "objects": [
            obj("lamp", "box", (0.12, 0.12, 0.25), (0.15, 0.55, 0.125, 0.0), movable=False),
            obj("dimmer switch", "cylinder", (0.015, 0.03), (0.0, -0.10, 0.015, 0.0),
                graspable=True, anchor="lamp"),
        ],
        "randomization": {"lamp": band(0.05, 0.25, 0.5, 0.62)},
        "checker": {"id": "rotate_signed", "params": {"target": "dimmer switch",
                                                      "min_rotation": 0.4}},
        "criterion": "the dimmer switch's net yaw change is at least +0.4 rad "
                     "(anticlockwise seen from above)",
        "proxy_notes": "the dimmer is a free-standing knob in front of the lamp; brightness "
                       "itself is not modeled, only the anticlockwise rotation.",
    },
    {
        "id": "hang_towel_on_rack",
        "instruction": "hang the towel on the rack",
        "objects": [
            obj("towel", "box", (0.07, 0.10, 0.02), (-0.2, 0.45, 0.01, 0.0), graspable=True),
            obj("rack", "box", (0.04, 0.30, 0.12), (0.15, 0.5, 0.06, 0.0), movable=False),
        ],
        "randomization": {"towel": band(-0.3, -0.12, 0.38, 0.55)},
        "checker": {"id": "rest_on", "params": {"target": "towel", "support": "rack",
                                                "tolerance": 0.01, "min_height": 0.05}},
        "criterion": "the towel ends resting on top of the rack (bottom within 0.01 m of the "
                     "rack top, center over it, clear of the table)",
        "proxy_notes": "the towel is rigid and rests on the rack's top face; draping is not "
                       "modeled.",
    },
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for task in TASKS:
        task.setdefault("proxy_notes", "")
        path = OUT / f"{task['id']}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(task, fh, indent=1, ensure_ascii=False)
            fh.write("\n")
    print(f"wrote {len(TASKS)} task files to {OUT}")


if __name__ == "__main__":
    main()
