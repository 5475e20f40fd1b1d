#pragma once

// The built-in three-bubble test system. `data/mini3.scn` is a copy of
// `kMini3Text`; both are kept identical.

#include "epecs/scenario.hpp"
#include "epecs/scenario_io.hpp"

#include <string>

namespace epecs {

inline constexpr const char* kMini3Text = R"SCN([network]
name = mini3
swing = ext
loss_fraction = 0

[bubble north]
[bubble center]
[bubble south]

[branch north center]
weight = 1
[branch center south]
weight = 1
[branch ext center]
weight = 1

[interface north_export]
members = north-center:+1
limit = 1000

[generator nuc1]
bubble = center
kind = must-run
p_min = 150
p_max = 150
r_min = 0
r_max = 0
h_f = 0
h_l = 10
h_q = 0
fuel_price = 0.8
online = 1
initial_output = 150
state_hours = 100

[generator coal1]
bubble = center
kind = dispatchable
p_min = 100
p_max = 350
r_min = -10
r_max = 10
h_f = 100
h_l = 9
h_q = 0.002
h_u = 500
h_d = 50
fuel_price = 2
t_up = 6
t_down = 4
u_max = 2
regulation_capacity = 30
online = 1
initial_output = 340
state_hours = 24

[generator ccgt1]
bubble = south
kind = dispatchable
p_min = 60
p_max = 300
r_min = -5
r_max = 5
h_f = 80
h_l = 7
h_q = 0.003
h_u = 200
h_d = 20
fuel_price = 4
t_up = 3
t_down = 2
u_max = 3
regulation_capacity = 30
online = 0
initial_output = 0
state_hours = 24

[generator gt1]
bubble = south
kind = fast-start
p_min = 10
p_max = 100
r_min = -10
r_max = 10
h_f = 30
h_l = 11
h_q = 0
h_u = 20
h_d = 0
fuel_price = 4
t_up = 1
t_down = 1
u_max = 6
regulation_capacity = 10
online = 0
initial_output = 0
state_hours = 24

[storage ps1]
bubble = south
p_min = 10
p_max = 80
s_min = 10
s_max = 80
e_min = 0
e_max = 400
efficiency = 0.75
initial_energy = 200

[semi wind_north]
bubble = north
kind = wind
curtailable = 1
threshold_price = -5
shape = wind
penetration = 0.3
capacity_factor = 0.45
variability = 0
error_da = 0
error_st = 0
seed = 11

[dr dr_south]
bubble = south
p_min = 0
p_max = 20
cost = 150

[load center]
shape = daily
peak_mw = 600
curtailable = 0
threshold_price = 1000
error_da = 0
error_st = 0
error_rt = 0

[load south]
shape = daily
peak_mw = 400
curtailable = 0
threshold_price = 1000
error_da = 0
error_st = 0
error_rt = 0

[reserves]
alpha_sys_tmsr = 0.08
alpha_sys_tmr = 1
alpha_sys_tmor = 0.08

[timing]
node_limit = 20000
mip_gap = 0.005

[seeds]
master = 42
)SCN";

inline Scenario mini3() { return parse_scenario(std::string(kMini3Text)); }

} // namespace epecs
