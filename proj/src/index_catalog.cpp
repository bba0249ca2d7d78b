#include <algorithm>

#include "specwb/indices.hpp"

namespace specwb {

const std::vector<CatalogEntry>& vegetationIndexCatalog() {
    static const std::vector<CatalogEntry> catalog = {
        {"NDVI", "(R800-R680)/(R800+R680)", "Normalized difference vegetation index"},
        {"SR", "R800/R680", "Simple ratio"},
        {"PRI", "(R531-R570)/(R531+R570)", "Photochemical reflectance index"},
        {"CAI", "0.5*(R2000+R2200)-R2100", "Cellulose absorption index"},
        {"mNDVI", "(R800-R680)/(R800+R680-2*R445)", "Modified NDVI"},
        {"mND705", "(R750-R705)/(R750+R705-2*R445)", "Modified red-edge normalized difference"},
        {"mSR705", "(R750-R445)/(R705-R445)", "Modified red-edge simple ratio"},
        {"NDWI", "(R860-R1240)/(R860+R1240)", "Normalized difference water index"},
        {"GI", "R554/R677", "Greenness index"},
        {"GMI1", "R750/R550", "Gitelson-Merzlyak index 1"},
        {"GMI2", "R750/R700", "Gitelson-Merzlyak index 2"},
        {"Vogelmann", "R740/R720", "Vogelmann red-edge ratio"},
        {"Vogelmann2", "(R734-R747)/(R715+R726)", "Vogelmann index 2"},
        {"Vogelmann3", "D1715/D1705", "Vogelmann derivative ratio"},
        {"Carter", "R695/R420", "Carter stress ratio"},
        {"PSSR", "R800/R635", "Pigment specific simple ratio"},
        {"PSND", "(R800-R470)/(R800+R470)", "Pigment specific normalized difference"},
        {"SIPI", "(R800-R445)/(R800-R680)", "Structure insensitive pigment index"},
        {"NPCI", "(R680-R430)/(R680+R430)", "Normalized pigment chlorophyll index"},
        {"MCARI", "((R700-R670)-0.2*(R700-R550))*(R700/R670)", "Modified chlorophyll absorption ratio index"},
        {"TCARI", "3*((R700-R670)-0.2*(R700-R550)*(R700/R670))", "Transformed chlorophyll absorption ratio index"},
        {"OSAVI", "(1+0.16)*(R800-R670)/(R800+R670+0.16)", "Optimized soil adjusted vegetation index"},
        {"SAVI", "1.5*(R800-R670)/(R800+R670+0.5)", "Soil adjusted vegetation index"},
        {"EVI", "2.5*((R800-R670)/(R800+6*R670-7.5*R475+1))", "Enhanced vegetation index"},
        {"MTCI", "(R754-R709)/(R709-R681)", "MERIS terrestrial chlorophyll index"},
        {"Datt", "(R850-R710)/(R850-R680)", "Datt chlorophyll index"},
        {"Maccioni", "(R780-R710)/(R780-R680)", "Maccioni chlorophyll index"},
        {"DD", "(R749-R720)-(R701-R672)", "Double difference index"},
    };
    return catalog;
}

const std::vector<CatalogEntry>& soilIndexCatalog() {
    static const std::vector<CatalogEntry> catalog = {
        {"NSMI", "(R1800-R2119)/(R1800+R2119)", "Normalized soil moisture index"},
        {"SWIR_FI", "R2133^2/(R2225*R2209^3)", "Shortwave infrared fine particles index"},
        {"CAI", "0.5*(R2000+R2200)-R2100", "Cellulose absorption index"},
    };
    return catalog;
}

namespace {

IndexValues fromCatalog(const Speclib& s, const std::string& name, const std::vector<CatalogEntry>& catalog,
                        const char* kind) {
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const CatalogEntry& e) { return e.name == name; });
    if (it == catalog.end()) {
        std::string names;
        for (const auto& e : catalog) names += (names.empty() ? "" : ", ") + e.name;
        throw Error(std::string("unknown ") + kind + " index '" + name + "'; available: " + names);
    }
    return evalIndex(parseIndex(it->formula), s);
}

}  // namespace

IndexValues vegindex(const Speclib& s, const std::string& name) {
    return fromCatalog(s, name, vegetationIndexCatalog(), "vegetation");
}

IndexValues soilindex(const Speclib& s, const std::string& name) {
    return fromCatalog(s, name, soilIndexCatalog(), "soil");
}

}  // namespace specwb
