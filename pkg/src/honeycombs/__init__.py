"""Regular honeycombs {p,q,r}: classification, conformal simplices, boundary images and meshes."""
