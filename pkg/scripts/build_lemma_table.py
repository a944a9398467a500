#!/usr/bin/env python3
"""Regenerate src/themeflow/assets/lemmas.tsv.

Expands a curated base vocabulary (common English plus scientific and
engineering terms) through regular inflection rules, with irregular verb and
noun forms listed explicitly. Every line maps one inflected surface form to
its base form; base forms are never keys, so lookup is idempotent by
construction. Run from the repo root:

    python scripts/build_lemma_table.py
"""
from __future__ import annotations

from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "themeflow" / "assets" / "lemmas.tsv"

IRREGULAR_VERBS = {
    "be": ["am", "is", "are", "was", "were", "been", "being"],
    "begin": ["begins", "began", "begun", "beginning"],
    "break": ["breaks", "broke", "broken", "breaking"],
    "bring": ["brings", "brought", "bringing"],
    "build": ["builds", "built", "building"],
    "buy": ["buys", "bought", "buying"],
    "choose": ["chooses", "chose", "chosen", "choosing"],
    "come": ["comes", "came", "coming"],
    "do": ["does", "did", "done", "doing"],
    "draw": ["draws", "drew", "drawn", "drawing"],
    "drive": ["drives", "drove", "driven", "driving"],
    "fall": ["falls", "fell", "fallen", "falling"],
    "feed": ["feeds", "fed", "feeding"],
    "find": ["finds", "found", "finding"],
    "get": ["gets", "got", "gotten", "getting"],
    "give": ["gives", "gave", "given", "giving"],
    "go": ["goes", "went", "gone", "going"],
    "grow": ["grows", "grew", "grown", "growing"],
    "have": ["has", "had", "having"],
    "hold": ["holds", "held", "holding"],
    "keep": ["keeps", "kept", "keeping"],
    "know": ["knows", "knew", "known", "knowing"],
    "lead": ["leads", "led", "leading"],
    "leave": ["leaves", "left", "leaving"],
    "lose": ["loses", "lost", "losing"],
    "make": ["makes", "made", "making"],
    "mean": ["means", "meant", "meaning"],
    "meet": ["meets", "met", "meeting"],
    "put": ["puts", "putting"],
    "read": ["reads", "reading"],
    "rise": ["rises", "rose", "risen", "rising"],
    "run": ["runs", "ran", "running"],
    "say": ["says", "said", "saying"],
    "see": ["sees", "saw", "seen", "seeing"],
    "seek": ["seeks", "sought", "seeking"],
    "send": ["sends", "sent", "sending"],
    "set": ["sets", "setting"],
    "show": ["shows", "showed", "shown", "showing"],
    "speak": ["speaks", "spoke", "spoken", "speaking"],
    "spend": ["spends", "spent", "spending"],
    "stand": ["stands", "stood", "standing"],
    "take": ["takes", "took", "taken", "taking"],
    "teach": ["teaches", "taught", "teaching"],
    "tell": ["tells", "told", "telling"],
    "think": ["thinks", "thought", "thinking"],
    "understand": ["understands", "understood", "understanding"],
    "undergo": ["undergoes", "underwent", "undergone", "undergoing"],
    "write": ["writes", "wrote", "written", "writing"],
}

IRREGULAR_NOUNS = {
    "analysis": ["analyses"],
    "axis": ["axes"],
    "basis": ["bases"],
    "criterion": ["criteria"],
    "hypothesis": ["hypotheses"],
    "matrix": ["matrices"],
    "medium": ["media"],
    "phenomenon": ["phenomena"],
    "spectrum": ["spectra"],
    "stimulus": ["stimuli"],
    "synthesis": ["syntheses"],
    "vertex": ["vertices"],
    "nucleus": ["nuclei"],
    "radius": ["radii"],
    "bacterium": ["bacteria"],
    "fungus": ["fungi"],
    "alga": ["algae"],
    "larva": ["larvae"],
    "formula": ["formulae"],
    "index": ["indices"],
    "appendix": ["appendices"],
    "equilibrium": ["equilibria"],
    "maximum": ["maxima"],
    "minimum": ["minima"],
    "optimum": ["optima"],
    "curriculum": ["curricula"],
    "foot": ["feet"],
    "tooth": ["teeth"],
    "child": ["children"],
    "life": ["lives"],
    "half": ["halves"],
    "leaf": ["leaves"],
    "man": ["men"],
    "woman": ["women"],
    "mouse": ["mice"],
}

# Verbs and verb-like bases expanded with s / ed / ing forms.
VERB_BASES = """
absorb accelerate accept access accommodate accumulate achieve acquire act activate adapt add address adhere
adjust administer adopt advance affect aggregate aid align allocate allow alter amplify analyze anchor
anneal apply approach approximate arise arrange assemble assess assign assist associate assume attach
attain attempt attenuate attract augment automate avoid balance base behave bend benefit bind block boost
bond calculate calibrate capture carry catalyze cause center challenge change characterize charge check
circulate claim clarify classify clean cluster coat collect combine communicate compare compensate compete
compile complete compose compress compute concentrate conclude condense conduct confer configure confine
confirm conform connect conserve consider consist consolidate constrain construct consume contain
contaminate continue contract contrast contribute control convert convey cool coordinate correct correlate
correspond corrode couple cover create cross crystallize culture cure cut damage decay decide decline
decompose decorate decrease define deform degrade deliver demonstrate denote depend deplete deposit derive
describe design detect determine develop deviate devise diagnose differ differentiate diffuse dilute
diminish direct discover discuss dissolve distinguish distort distribute disturb divide dominate dope
double drain drop dry elevate eliminate elongate embed emerge emit employ enable encapsulate encode
encounter engineer enhance enrich ensure enter equilibrate erode establish estimate evaluate evaporate
evolve examine exceed exchange excite exclude exert exhibit exist expand expect explain exploit explore
expose express extend extract fabricate facilitate fail favor feature fill filter fit fix flow fluctuate
focus fold follow form fracture fragment function fuse gain generate govern graft grind group guide handle
harden harness heal heat help hybridize identify illuminate illustrate image imitate immobilize impact
impair implant implement imply import improve incorporate increase indicate induce infect infer influence
inform inhibit initiate inject insert inspect install integrate intend interact intercalate interfere
interpret introduce investigate involve ionize irradiate isolate join label laminate last learn limit link
list load localize locate maintain manage manipulate manufacture map mark measure mediate melt merge
migrate mimic mineralize minimize mix model modify modulate monitor move multiply need neutralize note
nucleate observe obtain occur offer open operate oppose optimize order organize orient originate oscillate
oxidize participate pattern penetrate perform permit persist play point polarize polymerize position
possess precipitate predict prepare present preserve prevent print probe process produce promote propagate
propose protect prove provide publish pump purify quantify radiate raise range reach react realize receive
recognize reconstruct record recover recycle reduce refer refine reflect regenerate regulate reinforce
relate release rely remain remodel remove repair repeat replace replicate report represent reproduce
require rescue resemble resist resolve respond restore restrict result retain reveal reverse rotate
saturate scale scan scatter screen seal search select self-assemble sense separate sequence serve shape
share shift signal simulate sinter soften solve sort span spread stabilize stain start state stimulate
stir store strain strengthen stretch structure study submit substitute suffer suggest supply support
suppress survive suspend sustain swell switch synthesize target test texture tolerate track train transduce
transfer transform translate transmit transplant transport trap treat trigger tune turn use utilize
validate value vary verify vibrate visualize want weaken wear weld wet work yield
""".split()

# Nouns expanded with plural forms only.
NOUN_BASES = """
ability abstract acid actuator adhesion advance advantage agent aggregate alloy alternative aluminum
amplitude angle animal anode antibody antigen apparatus application aptamer architecture area array article
aspect assay assembly atom attribute author bacteriophage band bandwidth barrier battery beam behavior
benchmark bilayer biomarker biomaterial biopsy biosensor blood body bone boundary brain branch bubble
buffer bundle cancer candidate cantilever capability capacitor capacity capsule carbon carrier cartilage
cascade case catalyst category cathode cation cavity cell challenge chamber change channel characteristic
charge chemical chemistry chip circuit class clinic cluster coating collagen colloid column combination
complex component composite compound concentration concept condition conductivity configuration
consequence constant constraint contact context contrast contribution coating copolymer copper core corpus
correlation cost crack criteria crystal cue culture current curvature cycle cytokine database dataset decade
defect deficiency deformation degree delivery demand density deposition depth derivative design detail
detection detector device diagnosis diagram diameter difference diffusion dimension diode direction
discipline discovery disease disorder dispersion displacement display distribution divergence document
domain donor dose droplet drug duration dynamic earthquake effect efficacy efficiency effort elasticity
electrode electrolyte electron electronics element emission emulsion energy engine enzyme epithelium
equation equipment error evidence evolution example exchange excitation experiment expert expression
extension extreme fabrication facility factor failure family fatigue feature fiber fibroblast field figure
filament film filtration finding firm flow fluid fluorescence flux foam force forest form formation
formulation foundation fraction fracture framework frequency friction fuel function gap gas gel gene
generation genome geometry gland glass goal gradient grain graph graphene gravity grid group growth
hardware healing health heart hour house human hydrogel hydrogen image imaging impact implant implication
improvement impurity incidence increase indicator individual industry infection influence information
ingredient inhibitor initiative injury innovation input insight instance instrument insulator integration
intensity interaction interface interval intervention investigation ion island issue journal junction
keyword kidney kinetics laboratory laser lattice layer length lens lesion level ligand light limit
limitation line link lipid liquid liter liver load loss lung machine macrophage magnet magnitude majority
mammal management manuscript mass material matter measure measurement mechanism membrane memory metal
metabolite method methodology microbe microchannel micrograph microscope microscopy microstructure minute
mixture mode model modulus molecule moment monolayer monomer morphology motion motor muscle mutation
nanomaterial nanoparticle nanostructure nanotube nanowire network neuron nutrient object observation
obstacle oligomer opportunity organ organism outcome output oxide paper parameter particle pathogen pathway
patient peptide percentage performance period permeability perspective phase photon pixel plant plasma
plastic plate platelet platform point polymer population pore position potential powder power practice
precursor prediction presence pressure principle probability probe problem procedure process product
profile program project promise property proportion protein protocol prototype pulse purpose quality
quantity question ratio reaction reactor reader reagent receptor record recovery reference regime region
relation relationship report research researcher reservoir resin resistance resolution resonance resource
response restriction result review rise risk robot rock rod role route sample scaffold scale scanner
scenario scheme school science scientist second section sector sediment segment semiconductor sensitivity
sensor sequence series serum service shape sheet shell shift signal silicon simulation site situation size
skill skin society software soil solid solution solvent source species spectroscopy speed sphere stage
standard statistic stem stiffness strain strategy stream strength stress stroke structure student
study subject substance substrate subunit success sucrose sugar suite supplement surface surfactant surgeon
surgery survey suspension symmetry synthesizer system target task team technique technology temperature
template tendon tension term test theory therapy thickness threshold time tissue tool topic topology
toxicity toxin trajectory transducer transistor transition transplant treatment trend trial tube tumor
turbine type unit user vaccine vacuum valve variable variant variation vector vehicle velocity vesicle
vessel virus viscosity voltage volume waste water wave wavelength week weight wire worker year
""".split()

# Adjectives expanded with comparative and superlative forms.
ADJ_BASES = """
big bright broad cheap clean clear close cold dark deep dense dry fast fine firm flat great hard heavy high
hot large light long loose low narrow near new old poor pure rich rough sharp short simple slow small smooth
soft stiff strong thick thin tight tough warm weak wide young
""".split()

VOWELS = set("aeiou")


def plural(w: str) -> str:
    if w.endswith(("s", "x", "z", "ch", "sh")):
        return w + "es"
    if len(w) > 2 and w.endswith("y") and w[-2] not in VOWELS:
        return w[:-1] + "ies"
    return w + "s"


def doubles(w: str) -> bool:
    return (
        len(w) <= 4
        and len(w) >= 3
        and w[-1] not in VOWELS
        and w[-1] not in "wxy"
        and w[-2] in VOWELS
        and w[-3] not in VOWELS
    )


def past(w: str) -> str:
    if w.endswith("e"):
        return w + "d"
    if len(w) > 2 and w.endswith("y") and w[-2] not in VOWELS:
        return w[:-1] + "ied"
    if doubles(w):
        return w + w[-1] + "ed"
    return w + "ed"


def gerund(w: str) -> str:
    if w.endswith("ie"):
        return w[:-2] + "ying"
    if w.endswith("e") and not w.endswith("ee"):
        return w[:-1] + "ing"
    if doubles(w):
        return w + w[-1] + "ing"
    return w + "ing"


def main() -> None:
    bases = set(VERB_BASES) | set(NOUN_BASES) | set(ADJ_BASES) | set(IRREGULAR_VERBS) | set(IRREGULAR_NOUNS)
    table: dict[str, str] = {}

    def put(form: str, base: str) -> None:
        if form == base or form in bases:
            return  # passthrough wins over any generated mapping
        table.setdefault(form, base)

    for base, forms in IRREGULAR_VERBS.items():
        for f in forms:
            put(f, base)
    for base, forms in IRREGULAR_NOUNS.items():
        for f in forms:
            put(f, base)
    for w in VERB_BASES:
        put(plural(w), w)
        put(past(w), w)
        put(gerund(w), w)
    for w in NOUN_BASES:
        put(plural(w), w)
    for w in ADJ_BASES:
        put(w + "er" if not w.endswith("e") else w + "r", w)
        put(w + "est" if not w.endswith("e") else w + "st", w)
        if doubles(w):
            put(w + w[-1] + "er", w)
            put(w + w[-1] + "est", w)

    # idempotence guard: a mapped value must never itself be a key
    for form, base in list(table.items()):
        if base in table:
            del table[form]

    lines = [f"{form}\t{base}" for form, base in sorted(table.items())]
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} entries to {OUT}")


if __name__ == "__main__":
    main()
