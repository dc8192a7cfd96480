#pragma once

// Regression values recorded with `acceptance --record`.

#include <map>
#include <string>

inline const std::map<std::string, double>& goldens() {
    static const std::map<std::string, double> values{
        {"carleman/0.25/free/s1", 0.2822265625},
        {"carleman/0.25/free/s2", 0.28222656250000006},
        {"carleman/0.25/free/s4", 0.28222656250000006},
        {"carleman/0.25/forced/s1", 0.28222656212608788},
        {"carleman/0.25/forced/s2", 0.28222656249397327},
        {"carleman/0.25/forced/s4", 0.28222656249998751},
        {"carleman/0.5/free/s1", 0.33422851562500006},
        {"carleman/0.5/free/s2", 0.33422851562500006},
        {"carleman/0.5/free/s4", 0.334228515625},
        {"carleman/0.5/forced/s1", 0.3342285153100612},
        {"carleman/0.5/forced/s2", 0.33422851561992434},
        {"carleman/0.5/forced/s4", 0.33422851562498956},
        {"carleman/0.75/free/s1", 0.41040039062500006},
        {"carleman/0.75/free/s2", 0.410400390625},
        {"carleman/0.75/free/s4", 0.41040039062500006},
        {"carleman/0.75/forced/s1", 0.41040039031711206},
        {"carleman/0.75/forced/s2", 0.41040039062015571},
        {"carleman/0.75/forced/s4", 0.4104003906249904},
        {"gram_c_emp/K1", 8.8037275851640828},
        {"gram_c_emp/K2", 8.3680839369301783},
        {"gram_c_emp/K3", 8.2742236347655993},
        {"gram_c_emp/K4", 8.2428568544181786},
        {"gram_c_emp/K5", 8.230799564322929},
        {"gram_c_emp/K6", 8.2263023622735449},
        {"gram_c_emp/K7", 8.2251739407870641},
        {"gram_c_emp/K8", 8.2256569138661035},
        {"gram_c_emp/K9", 8.2269321472455399},
        {"gram_c_emp/K10", 8.2285893198196636},
        {"gram_c_emp/K11", 8.2304126743654482},
        {"gram_c_emp/K12", 8.2322853377021428},
        {"hum/linf_ratio", 0.081391276843896618},
        {"measurable/rho_max", 0.70480755790968519},
        {"measurable/h_emp", 0.40770970752818048},
        {"analyticity/factorial_ratio/t0.25", 0.021735893782791751},
        {"analyticity/factorial_ratio/t1", 0.001137985621955821},
    };
    return values;
}
